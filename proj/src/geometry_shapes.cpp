#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "valuescape/error.hpp"
#include "valuescape/geometry.hpp"

namespace valuescape::geometry {

namespace {

double sq_dist(const Point& a, const Point& b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}

// Boundary of the union of kept triangles, stitched into closed rings.
// Directed edges keep the kept region on their left, so exterior rings come
// out counter-clockwise and holes clockwise. At pinch vertices the walk
// takes the sharpest left turn, which keeps every ring simple.
std::vector<Ring> boundary_rings(const Triangulation& tri, const std::vector<char>& keep) {
    std::set<std::pair<int, int>> edges;
    for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
        if (!keep[t]) continue;
        const auto& v = tri.triangles[t];
        edges.insert({v[0], v[1]});
        edges.insert({v[1], v[2]});
        edges.insert({v[2], v[0]});
    }
    std::map<int, std::vector<int>> out_edges;
    std::set<std::pair<int, int>> boundary;
    for (const auto& e : edges) {
        if (edges.count({e.second, e.first})) continue;
        boundary.insert(e);
        out_edges[e.first].push_back(e.second);
    }

    std::vector<Ring> rings;
    std::set<std::pair<int, int>> used;
    for (const auto& start : boundary) {
        if (used.count(start)) continue;
        Ring ring;
        std::pair<int, int> cur = start;
        std::size_t guard = 0;
        while (true) {
            if (++guard > boundary.size() + 1)
                throw Error("alpha_shape: boundary walk did not close");
            used.insert(cur);
            ring.pts.push_back(tri.points[cur.first]);
            const Point& at = tri.points[cur.second];
            const Point in_dir{at.x - tri.points[cur.first].x, at.y - tri.points[cur.first].y};
            const auto& outs = out_edges.at(cur.second);
            int next = -1;
            double best = -std::numeric_limits<double>::infinity();
            for (const int cand : outs) {
                const Point out_dir{tri.points[cand].x - at.x, tri.points[cand].y - at.y};
                const double cross = in_dir.x * out_dir.y - in_dir.y * out_dir.x;
                const double dot = in_dir.x * out_dir.x + in_dir.y * out_dir.y;
                const double angle = std::atan2(cross, dot);
                if (angle > best) {
                    best = angle;
                    next = cand;
                }
            }
            if (next < 0) throw Error("alpha_shape: open boundary chain");
            cur = {cur.second, next};
            if (cur == start) break;
            if (used.count(cur)) throw Error("alpha_shape: boundary walk collided");
        }
        rings.push_back(std::move(ring));
    }
    return rings;
}

// crossing-number test, half-open rule on vertices
bool inside_ring(const Point& p, const Ring& ring) {
    bool inside = false;
    const auto n = ring.pts.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = ring.pts[j];
        const Point& b = ring.pts[i];
        if ((b.y > p.y) != (a.y > p.y)) {
            const double x_cross = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

double point_segment_dist(const Point& p, const Point& a, const Point& b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    if (len2 == 0.0) return std::sqrt(sq_dist(p, a));
    double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
    t = std::clamp(t, 0.0, 1.0);
    const Point proj{a.x + t * dx, a.y + t * dy};
    return std::sqrt(sq_dist(p, proj));
}

bool on_ring(const Point& p, const Ring& ring, double tol) {
    const auto n = ring.pts.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        if (point_segment_dist(p, ring.pts[j], ring.pts[i]) <= tol) return true;
    }
    return false;
}

// assemble exterior/hole rings into polygons
std::vector<Polygon> assemble(std::vector<Ring> rings) {
    std::vector<std::pair<Ring, double>> exteriors;
    std::vector<Ring> holes;
    for (auto& r : rings) {
        const double a = ring_signed_area(r);
        if (a > 0.0)
            exteriors.emplace_back(std::move(r), a);
        else if (a < 0.0)
            holes.push_back(std::move(r));
        // zero-area rings are dropped
    }
    std::vector<Polygon> polys;
    polys.reserve(exteriors.size());
    for (auto& [ring, area] : exteriors) {
        (void)area;
        polys.push_back(Polygon{std::move(ring), {}});
    }
    for (auto& hole : holes) {
        // representative strictly inside the hole edge, never on a sibling ring
        const Point mid{(hole.pts[0].x + hole.pts[1].x) / 2.0,
                        (hole.pts[0].y + hole.pts[1].y) / 2.0};
        int parent = -1;
        double parent_area = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < polys.size(); ++i) {
            const double a = ring_signed_area(polys[i].exterior);
            if (a < parent_area && inside_ring(mid, polys[i].exterior)) {
                parent = static_cast<int>(i);
                parent_area = a;
            }
        }
        if (parent >= 0) polys[static_cast<std::size_t>(parent)].holes.push_back(std::move(hole));
        // a hole with no parent cannot happen for a triangle union; ignore
    }
    return polys;
}

struct BuiltShape {
    std::vector<Polygon> polygons;
    std::vector<double> dropped;
};

BuiltShape build_shape(const Triangulation& tri, double radius_bound, double sliver_min_area,
                       bool apply_sliver_filter) {
    std::vector<char> keep(tri.triangles.size(), 0);
    for (std::size_t t = 0; t < tri.triangles.size(); ++t)
        keep[t] = tri.circumradius[t] <= radius_bound ? 1 : 0;
    auto polys = assemble(boundary_rings(tri, keep));
    BuiltShape out;
    for (auto& p : polys) {
        const double a = polygon_area(p);
        if (apply_sliver_filter && a < sliver_min_area)
            out.dropped.push_back(a);
        else
            out.polygons.push_back(std::move(p));
    }
    return out;
}

bool covers_all(const std::vector<Polygon>& polys, std::span<const Point> pts) {
    for (const auto& p : pts) {
        if (!point_in_polygons(p, polys)) return false;
    }
    return true;
}

}  // namespace

double ring_signed_area(const Ring& r) {
    double s = 0.0;
    const auto n = r.pts.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        s += r.pts[j].x * r.pts[i].y - r.pts[i].x * r.pts[j].y;
    }
    return s / 2.0;
}

double polygon_area(const Polygon& p) {
    double a = std::abs(ring_signed_area(p.exterior));
    for (const auto& h : p.holes) a -= std::abs(ring_signed_area(h));
    return std::max(a, 0.0);
}

double total_area(const std::vector<Polygon>& polys) {
    double a = 0.0;
    for (const auto& p : polys) a += polygon_area(p);
    return a;
}

bool point_in_polygon(const Point& pt, const Polygon& poly, double boundary_tol) {
    if (on_ring(pt, poly.exterior, boundary_tol)) return true;
    if (!inside_ring(pt, poly.exterior)) return false;
    for (const auto& h : poly.holes) {
        if (on_ring(pt, h, boundary_tol)) return true;
        if (inside_ring(pt, h)) return false;
    }
    return true;
}

bool point_in_polygons(const Point& pt, const std::vector<Polygon>& polys, double boundary_tol) {
    for (const auto& p : polys) {
        if (point_in_polygon(pt, p, boundary_tol)) return true;
    }
    return false;
}

AlphaShapeResult alpha_shape(std::span<const Point> pts, AlphaParam param,
                             double sliver_min_area) {
    if (pts.size() < 3) throw Error("degenerate cluster");
    const Triangulation tri = delaunay(pts);

    AlphaShapeResult result;
    if (!param.auto_mode) {
        if (param.alpha < 0.0) throw Error("alpha_shape: alpha must be >= 0");
        const double r_bound = param.alpha == 0.0 ? std::numeric_limits<double>::infinity()
                                                  : 1.0 / param.alpha;
        auto built = build_shape(tri, r_bound, sliver_min_area, true);
        result.polygons = std::move(built.polygons);
        result.dropped_sliver_areas = std::move(built.dropped);
        result.alpha = param.alpha;
        result.radius_bound = r_bound;
        return result;
    }

    // auto mode: smallest radius bound from the circumradius set such that
    // the surviving polygons cover every input point
    std::vector<double> radii = tri.circumradius;
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

    // coverage is monotone in the radius bound: larger bounds only merge
    // and grow parts, so binary search applies
    std::size_t lo = 0, hi = radii.size() - 1;
    bool any = false;
    if (covers_all(build_shape(tri, radii[hi], sliver_min_area, true).polygons, pts)) {
        any = true;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (covers_all(build_shape(tri, radii[mid], sliver_min_area, true).polygons, pts))
                hi = mid;
            else
                lo = mid + 1;
        }
    }

    if (any) {
        auto built = build_shape(tri, radii[hi], sliver_min_area, true);
        result.polygons = std::move(built.polygons);
        result.dropped_sliver_areas = std::move(built.dropped);
        result.radius_bound = radii[hi];
        result.alpha = 1.0 / radii[hi];
        return result;
    }

    // even the full triangulation fails with the sliver filter (the hull
    // itself is tiny): keep the hull rather than return nothing
    auto built = build_shape(tri, radii.back(), sliver_min_area, false);
    result.polygons = std::move(built.polygons);
    result.radius_bound = radii.back();
    result.alpha = 1.0 / radii.back();
    return result;
}

}  // namespace valuescape::geometry
