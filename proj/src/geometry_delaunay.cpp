#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "valuescape/error.hpp"
#include "valuescape/geometry.hpp"

namespace valuescape::geometry {

namespace {

constexpr int kGhost = -1;

struct Tri {
    std::array<int, 3> v;  // ghost (if any) is stored last
    bool alive = true;
    bool ghost() const { return v[2] == kGhost; }
};

// Rotate so a ghost vertex ends up in slot 2; rotation preserves orientation.
std::array<int, 3> normalize(std::array<int, 3> t) {
    if (t[0] == kGhost) return {t[1], t[2], t[0]};
    if (t[1] == kGhost) return {t[2], t[0], t[1]};
    return t;
}

bool strictly_inside_segment(const Point& a, const Point& b, const Point& p) {
    // caller guarantees collinearity, so coordinate comparisons are exact
    if (a.x != b.x)
        return (a.x < p.x) != (b.x < p.x) && p.x != a.x && p.x != b.x;
    return (a.y < p.y) != (b.y < p.y) && p.y != a.y && p.y != b.y;
}

class BowyerWatson {
public:
    explicit BowyerWatson(const std::vector<Point>& pts) : pts_(pts) {}

    std::vector<std::array<int, 3>> run(const std::vector<int>& order) {
        seed_triangle(order);
        for (std::size_t i = seed_count_; i < order.size(); ++i) insert(order[i]);
        std::vector<std::array<int, 3>> out;
        for (const auto& t : tris_)
            if (t.alive && !t.ghost()) out.push_back(t.v);
        return out;
    }

private:
    const std::vector<Point>& pts_;
    std::vector<Tri> tris_;
    std::size_t seed_count_ = 0;

    void add_tri(std::array<int, 3> v) { tris_.push_back(Tri{normalize(v), true}); }

    void seed_triangle(const std::vector<int>& order) {
        if (order.size() < 3) throw Error("degenerate cluster");
        const int a = order[0];
        const int b = order[1];
        std::size_t k = 2;
        int c = -1, side = 0;
        for (; k < order.size(); ++k) {
            side = orient2d(pts_[a], pts_[b], pts_[order[k]]);
            if (side != 0) {
                c = order[k];
                break;
            }
        }
        if (c < 0) throw Error("degenerate cluster");
        // Points skipped while searching are collinear with (a, b); insert
        // them after the seed so the cavity logic handles them uniformly.
        std::array<int, 3> t = side > 0 ? std::array<int, 3>{a, b, c} : std::array<int, 3>{a, c, b};
        add_tri(t);
        add_tri({t[1], t[0], kGhost});
        add_tri({t[2], t[1], kGhost});
        add_tri({t[0], t[2], kGhost});
        seed_count_ = 2;
        for (std::size_t j = 2; j < k; ++j) insert(order[j]);
        seed_count_ = k + 1;  // c itself is consumed
    }

    bool in_cavity(const Tri& t, const Point& p) const {
        if (!t.ghost()) {
            return incircle(pts_[t.v[0]], pts_[t.v[1]], pts_[t.v[2]], p) > 0;
        }
        // Ghost triangle (u, v, g): region is strictly left of u->v, plus
        // the open hull edge itself.
        const Point& u = pts_[t.v[0]];
        const Point& v = pts_[t.v[1]];
        const int o = orient2d(u, v, p);
        if (o > 0) return true;
        if (o == 0) return strictly_inside_segment(u, v, p);
        return false;
    }

    void insert(int pi) {
        const Point& p = pts_[pi];
        std::vector<std::size_t> cavity;
        for (std::size_t i = 0; i < tris_.size(); ++i) {
            if (tris_[i].alive && in_cavity(tris_[i], p)) cavity.push_back(i);
        }
        // p duplicates an existing vertex only if the caller failed to
        // dedupe; an empty cavity would corrupt the structure otherwise
        if (cavity.empty()) throw Error("delaunay: point produced an empty cavity");

        std::map<std::pair<int, int>, int> dir_edges;
        for (const auto idx : cavity) {
            const auto& t = tris_[idx].v;
            dir_edges[{t[0], t[1]}]++;
            dir_edges[{t[1], t[2]}]++;
            dir_edges[{t[2], t[0]}]++;
        }
        for (const auto idx : cavity) tris_[idx].alive = false;
        for (const auto& [edge, count] : dir_edges) {
            (void)count;
            const auto rev = dir_edges.find({edge.second, edge.first});
            if (rev != dir_edges.end()) continue;  // internal to the cavity
            add_tri({edge.first, edge.second, pi});
        }
    }
};

}  // namespace

Triangulation delaunay(std::span<const Point> pts) {
    Triangulation result;
    result.points.assign(pts.begin(), pts.end());

    // collapse exact duplicates onto their first occurrence
    std::map<std::pair<double, double>, int> seen;
    std::vector<int> order;
    order.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto key = std::pair(pts[i].x, pts[i].y);
        if (seen.emplace(key, static_cast<int>(i)).second) order.push_back(static_cast<int>(i));
    }
    if (order.size() < 3) throw Error("degenerate cluster");

    BowyerWatson bw(result.points);
    result.triangles = bw.run(order);
    result.circumradius.reserve(result.triangles.size());
    for (const auto& t : result.triangles) {
        result.circumradius.push_back(
            triangle_circumradius(result.points[t[0]], result.points[t[1]], result.points[t[2]]));
    }
    return result;
}

}  // namespace valuescape::geometry
