#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace valuescape::ingest {

struct LonLat {
    double lon = 0.0;  // degrees, WGS84
    double lat = 0.0;
};

// One citizen comment from a participation platform export.
struct Contribution {
    std::string id;
    std::string text;
    std::optional<LonLat> location;
    std::string process_id;
    std::optional<std::string> timestamp;  // ISO-8601 instant, kept verbatim
};

enum class SourceFormat { csv, jsonl, geojson };

SourceFormat parse_format(std::string_view name);
std::string format_name(SourceFormat fmt);

// Iteration order is input order; every downstream seed and index is
// anchored to it.
struct ContributionSet {
    std::vector<Contribution> contributions;
    SourceFormat source_format = SourceFormat::csv;
};

struct ProjectedPoint {
    std::string contribution_id;
    double x = 0.0;  // meters east of projection origin
    double y = 0.0;  // meters north of projection origin
};

// Local equirectangular plane about the centroid of the geolocated points.
// Valid for city-scale extents; project() refuses inputs wider than the
// 100 km half-width guard.
struct Projection {
    double origin_lon = 0.0;  // degrees
    double origin_lat = 0.0;
    std::vector<ProjectedPoint> points;

    LonLat to_wgs84(double x, double y) const;
    ProjectedPoint to_plane(const std::string& id, const LonLat& ll) const;
};

constexpr double kEarthRadiusM = 6371008.8;
constexpr double kExtentHalfWidthM = 100000.0;

struct StatsReport {
    std::size_t total = 0;
    std::size_t geolocated = 0;
    std::size_t empty_text = 0;
    std::map<std::string, std::size_t> per_process;

    nlohmann::ordered_json to_json() const;
};

// Parse a dataset in the declared format. CSV columns are
// id,text,lon,lat,process_id,timestamp (RFC 4180); JSONL carries the same
// keys one object per line; GeoJSON is an RFC 7946 FeatureCollection with
// the non-geometry fields in properties. Records without coordinates stay
// in the set with location = none.
ContributionSet parse_contributions(std::istream& in, SourceFormat format);
ContributionSet parse_contributions_file(const std::filesystem::path& path, SourceFormat format);

Projection project(const ContributionSet& set);

StatsReport corpus_stats(const ContributionSet& set);

double haversine_m(const LonLat& a, const LonLat& b);

nlohmann::ordered_json to_json(const ContributionSet& set);
ContributionSet contribution_set_from_json(const nlohmann::json& j);
void write_csv(std::ostream& out, const ContributionSet& set);

}  // namespace valuescape::ingest
