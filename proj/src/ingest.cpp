#include "valuescape/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "valuescape/error.hpp"

namespace valuescape::ingest {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

void check_coordinate(double lon, double lat, std::size_t record) {
    if (!(lat >= -90.0 && lat <= 90.0))
        throw Error("record " + std::to_string(record) + ": lat out of range");
    if (!(lon >= -180.0 && lon <= 180.0))
        throw Error("record " + std::to_string(record) + ": lon out of range");
}

// RFC 4180 row reader. Returns false on end of input. Handles quoted
// fields, doubled quotes and CRLF / LF endings.
bool read_csv_row(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int c;
    while ((c = in.get()) != EOF) {
        any = true;
        const char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch == '\r') {
            // swallow; newline decides the row end
        } else if (ch == '\n') {
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(ch);
        }
    }
    if (!any) return false;
    if (in_quotes) throw Error("unterminated quoted field at end of CSV input");
    fields.push_back(std::move(field));
    return true;
}

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

double parse_double(const std::string& s, const char* what, std::size_t record) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error("record " + std::to_string(record) + ": malformed " + std::string(what) +
                    " value '" + s + "'");
    }
}

ContributionSet parse_csv(std::istream& in) {
    ContributionSet set;
    set.source_format = SourceFormat::csv;
    std::vector<std::string> row;
    if (!read_csv_row(in, row)) throw Error("empty CSV input");
    // header row is required and fixes the column order
    const std::vector<std::string> expected = {"id", "text", "lon", "lat", "process_id", "timestamp"};
    std::vector<int> col(expected.size(), -1);
    for (std::size_t i = 0; i < expected.size(); ++i) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (row[j] == expected[i]) col[i] = static_cast<int>(j);
        }
        if (col[i] < 0 && expected[i] != "timestamp")
            throw Error("CSV header missing required column '" + expected[i] + "'");
    }
    std::size_t record = 1;
    while (read_csv_row(in, row)) {
        ++record;
        if (row.size() == 1 && blank(row[0])) continue;  // trailing newline
        Contribution c;
        auto cell = [&](int idx) -> const std::string& {
            static const std::string empty;
            if (idx < 0 || static_cast<std::size_t>(idx) >= row.size()) return empty;
            return row[static_cast<std::size_t>(idx)];
        };
        c.id = cell(col[0]);
        if (c.id.empty()) throw Error("record " + std::to_string(record) + ": empty id");
        c.text = cell(col[1]);
        const std::string& lon_s = cell(col[2]);
        const std::string& lat_s = cell(col[3]);
        const bool has_lon = !blank(lon_s);
        const bool has_lat = !blank(lat_s);
        if (has_lon != has_lat)
            throw Error("record " + std::to_string(record) + ": lon/lat must both be present or both empty");
        if (has_lon) {
            const double lon = parse_double(lon_s, "lon", record);
            const double lat = parse_double(lat_s, "lat", record);
            check_coordinate(lon, lat, record);
            c.location = LonLat{lon, lat};
        }
        c.process_id = cell(col[4]);
        const std::string& ts = cell(col[5]);
        if (!blank(ts)) c.timestamp = ts;
        set.contributions.push_back(std::move(c));
    }
    return set;
}

Contribution contribution_from_object(const nlohmann::json& o, std::size_t record) {
    Contribution c;
    if (!o.contains("id") || !o["id"].is_string() || o["id"].get<std::string>().empty())
        throw Error("record " + std::to_string(record) + ": missing or empty id");
    c.id = o["id"].get<std::string>();
    c.text = o.value("text", std::string{});
    c.process_id = o.value("process_id", std::string{});
    if (o.contains("timestamp") && o["timestamp"].is_string())
        c.timestamp = o["timestamp"].get<std::string>();
    const bool has_lon = o.contains("lon") && o["lon"].is_number();
    const bool has_lat = o.contains("lat") && o["lat"].is_number();
    if (has_lon != has_lat)
        throw Error("record " + std::to_string(record) + ": lon/lat must both be present or both absent");
    if (has_lon) {
        const double lon = o["lon"].get<double>();
        const double lat = o["lat"].get<double>();
        check_coordinate(lon, lat, record);
        c.location = LonLat{lon, lat};
    }
    return c;
}

ContributionSet parse_jsonl(std::istream& in) {
    ContributionSet set;
    set.source_format = SourceFormat::jsonl;
    std::string line;
    std::size_t record = 0;
    while (std::getline(in, line)) {
        ++record;
        if (blank(line)) continue;
        nlohmann::json o;
        try {
            o = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error("record " + std::to_string(record) + ": malformed JSON: " + e.what());
        }
        if (!o.is_object()) throw Error("record " + std::to_string(record) + ": expected a JSON object");
        set.contributions.push_back(contribution_from_object(o, record));
    }
    return set;
}

ContributionSet parse_geojson(std::istream& in) {
    ContributionSet set;
    set.source_format = SourceFormat::geojson;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed GeoJSON: ") + e.what());
    }
    if (doc.value("type", std::string{}) != "FeatureCollection")
        throw Error("GeoJSON input must be a FeatureCollection");
    if (!doc.contains("features") || !doc["features"].is_array())
        throw Error("FeatureCollection has no features array");
    std::size_t record = 0;
    for (const auto& feature : doc["features"]) {
        ++record;
        if (feature.value("type", std::string{}) != "Feature")
            throw Error("record " + std::to_string(record) + ": not a Feature");
        const auto& props = feature.contains("properties") && feature["properties"].is_object()
                                ? feature["properties"]
                                : nlohmann::json::object();
        Contribution c = contribution_from_object(props, record);
        if (feature.contains("geometry") && feature["geometry"].is_object()) {
            const auto& geom = feature["geometry"];
            if (geom.value("type", std::string{}) != "Point")
                throw Error("record " + std::to_string(record) + ": only Point geometries are supported");
            const auto& coords = geom["coordinates"];
            if (!coords.is_array() || coords.size() < 2)
                throw Error("record " + std::to_string(record) + ": malformed Point coordinates");
            const double lon = coords[0].get<double>();
            const double lat = coords[1].get<double>();
            check_coordinate(lon, lat, record);
            c.location = LonLat{lon, lat};
        }
        set.contributions.push_back(std::move(c));
    }
    return set;
}

void check_unique_ids(const ContributionSet& set) {
    std::unordered_set<std::string> seen;
    seen.reserve(set.contributions.size());
    for (const auto& c : set.contributions) {
        if (!seen.insert(c.id).second) throw Error("duplicate id '" + c.id + "'");
    }
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

SourceFormat parse_format(std::string_view name) {
    if (name == "csv") return SourceFormat::csv;
    if (name == "jsonl") return SourceFormat::jsonl;
    if (name == "geojson") return SourceFormat::geojson;
    throw Error("unknown source format '" + std::string(name) + "' (expected csv, jsonl or geojson)");
}

std::string format_name(SourceFormat fmt) {
    switch (fmt) {
        case SourceFormat::csv: return "csv";
        case SourceFormat::jsonl: return "jsonl";
        case SourceFormat::geojson: return "geojson";
    }
    return "csv";
}

ContributionSet parse_contributions(std::istream& in, SourceFormat format) {
    ContributionSet set;
    switch (format) {
        case SourceFormat::csv: set = parse_csv(in); break;
        case SourceFormat::jsonl: set = parse_jsonl(in); break;
        case SourceFormat::geojson: set = parse_geojson(in); break;
    }
    check_unique_ids(set);
    return set;
}

ContributionSet parse_contributions_file(const std::filesystem::path& path, SourceFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open input file: " + path.string());
    return parse_contributions(in, format);
}

LonLat Projection::to_wgs84(double x, double y) const {
    LonLat ll;
    ll.lat = origin_lat + (y / kEarthRadiusM) / kDegToRad;
    ll.lon = origin_lon + (x / (kEarthRadiusM * std::cos(origin_lat * kDegToRad))) / kDegToRad;
    return ll;
}

ProjectedPoint Projection::to_plane(const std::string& id, const LonLat& ll) const {
    ProjectedPoint p;
    p.contribution_id = id;
    p.x = kEarthRadiusM * std::cos(origin_lat * kDegToRad) * (ll.lon - origin_lon) * kDegToRad;
    p.y = kEarthRadiusM * (ll.lat - origin_lat) * kDegToRad;
    return p;
}

Projection project(const ContributionSet& set) {
    double sum_lon = 0.0, sum_lat = 0.0;
    double min_lon = 1e9, max_lon = -1e9, min_lat = 1e9, max_lat = -1e9;
    std::size_t n = 0;
    for (const auto& c : set.contributions) {
        if (!c.location) continue;
        ++n;
        sum_lon += c.location->lon;
        sum_lat += c.location->lat;
        min_lon = std::min(min_lon, c.location->lon);
        max_lon = std::max(max_lon, c.location->lon);
        min_lat = std::min(min_lat, c.location->lat);
        max_lat = std::max(max_lat, c.location->lat);
    }
    if (n == 0) throw Error("no spatial data");

    Projection proj;
    proj.origin_lon = sum_lon / static_cast<double>(n);
    proj.origin_lat = sum_lat / static_cast<double>(n);

    // The local plane is only meaningful for city-scale extents. A raw
    // longitude span beyond 180 degrees means the input wraps the antimeridian.
    if (max_lon - min_lon > 180.0) throw Error("extent exceeds projection validity");
    const double half_height = kEarthRadiusM * (max_lat - min_lat) * kDegToRad / 2.0;
    const double half_width = kEarthRadiusM * std::cos(proj.origin_lat * kDegToRad) *
                              (max_lon - min_lon) * kDegToRad / 2.0;
    if (half_height > kExtentHalfWidthM || half_width > kExtentHalfWidthM)
        throw Error("extent exceeds projection validity");

    proj.points.reserve(n);
    for (const auto& c : set.contributions) {
        if (!c.location) continue;
        proj.points.push_back(proj.to_plane(c.id, *c.location));
    }
    return proj;
}

StatsReport corpus_stats(const ContributionSet& set) {
    StatsReport r;
    r.total = set.contributions.size();
    for (const auto& c : set.contributions) {
        if (c.location) ++r.geolocated;
        if (c.text.empty()) ++r.empty_text;
        ++r.per_process[c.process_id];
    }
    return r;
}

double haversine_m(const LonLat& a, const LonLat& b) {
    const double phi1 = a.lat * kDegToRad;
    const double phi2 = b.lat * kDegToRad;
    const double dphi = (b.lat - a.lat) * kDegToRad;
    const double dlam = (b.lon - a.lon) * kDegToRad;
    const double s = std::sin(dphi / 2.0) * std::sin(dphi / 2.0) +
                     std::cos(phi1) * std::cos(phi2) * std::sin(dlam / 2.0) * std::sin(dlam / 2.0);
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(s)));
}

nlohmann::ordered_json StatsReport::to_json() const {
    nlohmann::ordered_json j;
    j["total"] = total;
    j["geolocated"] = geolocated;
    j["empty_text"] = empty_text;
    j["per_process"] = nlohmann::ordered_json::object();
    for (const auto& [proc, count] : per_process) j["per_process"][proc] = count;
    return j;
}

nlohmann::ordered_json to_json(const ContributionSet& set) {
    nlohmann::ordered_json j;
    j["source_format"] = format_name(set.source_format);
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : set.contributions) {
        nlohmann::ordered_json o;
        o["id"] = c.id;
        o["text"] = c.text;
        if (c.location) {
            o["lon"] = c.location->lon;
            o["lat"] = c.location->lat;
        } else {
            o["lon"] = nullptr;
            o["lat"] = nullptr;
        }
        o["process_id"] = c.process_id;
        if (c.timestamp) o["timestamp"] = *c.timestamp;
        arr.push_back(std::move(o));
    }
    j["contributions"] = std::move(arr);
    return j;
}

ContributionSet contribution_set_from_json(const nlohmann::json& j) {
    ContributionSet set;
    set.source_format = parse_format(j.value("source_format", std::string{"csv"}));
    std::size_t record = 0;
    for (const auto& o : j.at("contributions")) {
        ++record;
        Contribution c;
        c.id = o.at("id").get<std::string>();
        c.text = o.value("text", std::string{});
        c.process_id = o.value("process_id", std::string{});
        if (o.contains("timestamp") && o["timestamp"].is_string())
            c.timestamp = o["timestamp"].get<std::string>();
        if (o.contains("lon") && o["lon"].is_number()) {
            const double lon = o["lon"].get<double>();
            const double lat = o.at("lat").get<double>();
            check_coordinate(lon, lat, record);
            c.location = LonLat{lon, lat};
        }
        set.contributions.push_back(std::move(c));
    }
    check_unique_ids(set);
    return set;
}

void write_csv(std::ostream& out, const ContributionSet& set) {
    out << "id,text,lon,lat,process_id,timestamp\n";
    for (const auto& c : set.contributions) {
        out << csv_quote(c.id) << ',' << csv_quote(c.text) << ',';
        if (c.location) out << fmt_double(c.location->lon) << ',' << fmt_double(c.location->lat);
        else out << ',';
        out << ',' << csv_quote(c.process_id) << ',';
        if (c.timestamp) out << csv_quote(*c.timestamp);
        out << '\n';
    }
}

}  // namespace valuescape::ingest
