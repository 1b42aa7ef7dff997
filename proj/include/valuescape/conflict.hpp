#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "valuescape/geometry.hpp"
#include "valuescape/topicmodel.hpp"
#include "valuescape/valuemap.hpp"

namespace valuescape::conflict {

enum class ArchetypeSource { campbell, godschalk, this_paper };

struct Archetype {
    std::string id;
    std::string name;
    ArchetypeSource source = ArchetypeSource::this_paper;
};

// Unordered value pair -> named conflict archetype. Ships with nine
// entries; the file format lets extended catalogs add their own. Pairs may
// reference value ids outside the active registry; they simply never
// trigger.
struct ArchetypeMatrix {
    std::map<std::pair<std::string, std::string>, Archetype> entries;  // key: (min, max)

    std::optional<Archetype> lookup(const std::string& a, const std::string& b) const;
    static ArchetypeMatrix default_matrix();
    static ArchetypeMatrix from_json(const nlohmann::json& j);
    static ArchetypeMatrix from_file(const std::filesystem::path& path);
    nlohmann::ordered_json to_json() const;
};

constexpr double kDefaultMinConflictAreaM2 = 100.0;

struct ConflictRegion {
    std::string value_a;  // value_a < value_b lexicographically
    std::string value_b;
    std::vector<geometry::Polygon> geometry;
    double area_m2 = 0.0;
    std::optional<std::string> archetype;
    std::vector<int> clusters_a;  // contributing cluster ids per side
    std::vector<int> clusters_b;
};

// Pairwise intersection of value polygon layers; merged regions below
// min_conflict_area are suppressed as slivers.
std::vector<ConflictRegion> detect_conflicts(
    const std::map<std::string, std::vector<geometry::ValuePolygonSet>>& layers,
    double min_conflict_area = kDefaultMinConflictAreaM2);

ConflictRegion classify(ConflictRegion region, const ArchetypeMatrix& matrix);

struct SphereNode {
    std::string value_id;
    valuemap::ValueKind kind = valuemap::ValueKind::intrinsic;
    std::size_t document_count = 0;
};

enum class EdgeKind { conflict, overlap };

struct SphereEdge {
    std::string value_a;
    std::string value_b;
    EdgeKind kind = EdgeKind::conflict;
    std::optional<std::string> archetype;  // conflict edges only
    double weight = 0.0;                   // area for conflicts, doc count for overlaps
};

struct ValueSphereGraph {
    std::vector<SphereNode> nodes;
    std::vector<SphereEdge> edges;

    nlohmann::ordered_json to_json() const;
    std::string to_dot() const;
};

// Nodes are the values observed in the assignments. Conflict edges mirror
// the detected regions; overlap edges count contributions whose secondary
// above-threshold topic maps to a different value than their top topic.
ValueSphereGraph build_sphere_graph(const valuemap::ValueRegistry& registry,
                                    const std::vector<ConflictRegion>& conflicts,
                                    const std::vector<valuemap::DocValueAssignment>& assignments,
                                    const topicmodel::TopicModel& model,
                                    double secondary_threshold = 0.2);

}  // namespace valuescape::conflict
