#include "valuescape/conflict.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "valuescape/error.hpp"

namespace valuescape::conflict {

namespace {

std::pair<std::string, std::string> norm_pair(const std::string& a, const std::string& b) {
    return a < b ? std::pair(a, b) : std::pair(b, a);
}

ArchetypeSource source_from(const std::string& s) {
    if (s == "campbell") return ArchetypeSource::campbell;
    if (s == "godschalk") return ArchetypeSource::godschalk;
    if (s == "this_paper") return ArchetypeSource::this_paper;
    throw Error("archetype matrix: unknown source '" + s + "'");
}

std::string source_name(ArchetypeSource s) {
    switch (s) {
        case ArchetypeSource::campbell: return "campbell";
        case ArchetypeSource::godschalk: return "godschalk";
        case ArchetypeSource::this_paper: return "this_paper";
    }
    return "this_paper";
}

}  // namespace

std::optional<Archetype> ArchetypeMatrix::lookup(const std::string& a, const std::string& b) const {
    const auto it = entries.find(norm_pair(a, b));
    if (it == entries.end()) return std::nullopt;
    return it->second;
}

ArchetypeMatrix ArchetypeMatrix::default_matrix() {
    ArchetypeMatrix m;
    const auto add = [&](const char* a, const char* b, const char* id, const char* name,
                         ArchetypeSource src) {
        m.entries[norm_pair(a, b)] = Archetype{id, name, src};
    };
    // the classic sustainability triangle
    add("equity", "economy", "property", "Property Conflict", ArchetypeSource::campbell);
    add("equity", "ecology", "development", "Development Conflict", ArchetypeSource::campbell);
    add("economy", "ecology", "resource", "Resource Conflict", ArchetypeSource::campbell);
    // the livability extension
    add("equity", "livability", "gentrification", "Gentrification Conflict",
        ArchetypeSource::godschalk);
    add("livability", "ecology", "green_cities", "Green Cities Conflict",
        ArchetypeSource::godschalk);
    add("economy", "livability", "growth_management", "Growth Management Conflict",
        ArchetypeSource::godschalk);
    // the three workshop-derived conflicts; safety_health is the combined
    // value of the default catalog, quietness/aesthetics belong to the
    // extended one
    add("safety_health", "ecology", "dangers_of_nature", "Dangers of Nature Conflict",
        ArchetypeSource::this_paper);
    add("economy", "safety_health", "externality", "Externality Conflict",
        ArchetypeSource::this_paper);
    add("quietness", "aesthetics", "drawback_of_beauty", "Drawback of Beauty Conflict",
        ArchetypeSource::this_paper);
    return m;
}

ArchetypeMatrix ArchetypeMatrix::from_json(const nlohmann::json& j) {
    ArchetypeMatrix m;
    for (const auto& o : j.at("archetypes")) {
        const std::string a = o.at("value_a").get<std::string>();
        const std::string b = o.at("value_b").get<std::string>();
        if (a == b) throw Error("archetype matrix: pair with identical values '" + a + "'");
        const auto key = norm_pair(a, b);
        if (m.entries.count(key))
            throw Error("archetype matrix: duplicate pair (" + key.first + ", " + key.second + ")");
        Archetype arch;
        arch.id = o.at("id").get<std::string>();
        arch.name = o.value("name", arch.id);
        arch.source = source_from(o.value("source", std::string{"this_paper"}));
        m.entries[key] = std::move(arch);
    }
    return m;
}

ArchetypeMatrix ArchetypeMatrix::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open archetype matrix: " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error("archetype matrix " + path.string() + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

nlohmann::ordered_json ArchetypeMatrix::to_json() const {
    nlohmann::ordered_json j;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [pair, arch] : entries) {
        nlohmann::ordered_json o;
        o["value_a"] = pair.first;
        o["value_b"] = pair.second;
        o["id"] = arch.id;
        o["name"] = arch.name;
        o["source"] = source_name(arch.source);
        arr.push_back(std::move(o));
    }
    j["archetypes"] = std::move(arr);
    return j;
}

std::vector<ConflictRegion> detect_conflicts(
    const std::map<std::string, std::vector<geometry::ValuePolygonSet>>& layers,
    double min_conflict_area) {
    std::vector<ConflictRegion> regions;
    for (auto ia = layers.begin(); ia != layers.end(); ++ia) {
        for (auto ib = std::next(ia); ib != layers.end(); ++ib) {
            ConflictRegion region;
            region.value_a = ia->first;
            region.value_b = ib->first;
            std::set<int> clusters_a, clusters_b;
            std::vector<geometry::Polygon> pieces;
            for (const auto& sa : ia->second) {
                for (const auto& sb : ib->second) {
                    auto overlap = geometry::intersect(sa.polygons, sb.polygons);
                    if (overlap.empty()) continue;
                    clusters_a.insert(sa.cluster_id);
                    clusters_b.insert(sb.cluster_id);
                    for (auto& p : overlap) pieces.push_back(std::move(p));
                }
            }
            if (pieces.empty()) continue;
            region.geometry = geometry::union_all(pieces);
            region.area_m2 = geometry::total_area(region.geometry);
            if (region.area_m2 <= min_conflict_area) continue;
            region.clusters_a.assign(clusters_a.begin(), clusters_a.end());
            region.clusters_b.assign(clusters_b.begin(), clusters_b.end());
            regions.push_back(std::move(region));
        }
    }
    return regions;
}

ConflictRegion classify(ConflictRegion region, const ArchetypeMatrix& matrix) {
    const auto arch = matrix.lookup(region.value_a, region.value_b);
    if (arch) region.archetype = arch->id;
    else region.archetype.reset();  // unnamed conflict, still reported
    return region;
}

ValueSphereGraph build_sphere_graph(const valuemap::ValueRegistry& registry,
                                    const std::vector<ConflictRegion>& conflicts,
                                    const std::vector<valuemap::DocValueAssignment>& assignments,
                                    const topicmodel::TopicModel& model,
                                    double secondary_threshold) {
    ValueSphereGraph graph;

    std::map<std::string, std::size_t> doc_counts;
    for (const auto& a : assignments) {
        if (a.value_id) ++doc_counts[*a.value_id];
    }
    for (const auto& v : registry.values) {
        const auto it = doc_counts.find(v.id);
        if (it == doc_counts.end()) continue;  // only observed values become nodes
        graph.nodes.push_back(SphereNode{v.id, v.kind, it->second});
    }

    for (const auto& c : conflicts) {
        SphereEdge e;
        e.value_a = c.value_a;
        e.value_b = c.value_b;
        e.kind = EdgeKind::conflict;
        e.archetype = c.archetype;
        e.weight = c.area_m2;
        graph.edges.push_back(std::move(e));
    }

    // Overlap edges: a contribution whose secondary above-threshold topic
    // maps to a different value connects the two value spheres.
    if (model.doc_ids.size() == assignments.size()) {
        std::map<std::pair<std::string, std::string>, double> overlap;
        for (std::size_t d = 0; d < assignments.size(); ++d) {
            const auto& a = assignments[d];
            if (!a.value_id) continue;
            const double* theta = model.theta_row(d);
            std::set<std::string> partners;
            for (int t = 0; t < model.k; ++t) {
                if (t == a.top_topic || theta[t] < secondary_threshold) continue;
                const auto it = registry.topic_assignments.find(t);
                if (it == registry.topic_assignments.end()) continue;
                if (it->second == *a.value_id) continue;
                partners.insert(it->second);
            }
            for (const auto& p : partners) overlap[norm_pair(*a.value_id, p)] += 1.0;
        }
        for (const auto& [pair, weight] : overlap) {
            SphereEdge e;
            e.value_a = pair.first;
            e.value_b = pair.second;
            e.kind = EdgeKind::overlap;
            e.weight = weight;
            graph.edges.push_back(std::move(e));
        }
    }
    return graph;
}

nlohmann::ordered_json ValueSphereGraph::to_json() const {
    nlohmann::ordered_json j;
    j["note"] =
        "overlap edges operationalize sphere interconnection as secondary "
        "above-threshold topics mapped to a different value";
    auto nodes_j = nlohmann::ordered_json::array();
    for (const auto& n : nodes) {
        nlohmann::ordered_json o;
        o["id"] = n.value_id;
        o["kind"] = n.kind == valuemap::ValueKind::intrinsic ? "intrinsic" : "instrumental";
        o["documents"] = n.document_count;
        nodes_j.push_back(std::move(o));
    }
    j["nodes"] = std::move(nodes_j);
    auto edges_j = nlohmann::ordered_json::array();
    for (const auto& e : edges) {
        nlohmann::ordered_json o;
        o["value_a"] = e.value_a;
        o["value_b"] = e.value_b;
        o["kind"] = e.kind == EdgeKind::conflict ? "conflict" : "overlap";
        if (e.archetype) o["archetype"] = *e.archetype;
        o["weight"] = e.weight;
        edges_j.push_back(std::move(o));
    }
    j["edges"] = std::move(edges_j);
    return j;
}

std::string ValueSphereGraph::to_dot() const {
    std::ostringstream os;
    os << "graph value_spheres {\n";
    for (const auto& n : nodes) {
        os << "  \"" << n.value_id << "\" [shape="
           << (n.kind == valuemap::ValueKind::intrinsic ? "circle" : "ellipse") << "];\n";
    }
    for (const auto& e : edges) {
        os << "  \"" << e.value_a << "\" -- \"" << e.value_b << "\"";
        if (e.kind == EdgeKind::conflict) {
            os << " [label=\"" << (e.archetype ? *e.archetype : std::string{"unnamed"})
               << "\", style=solid]";
        } else {
            os << " [style=dashed]";
        }
        os << ";\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace valuescape::conflict
