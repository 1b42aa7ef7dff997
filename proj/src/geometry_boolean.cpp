#include <boost/geometry.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

#include <string>

#include "valuescape/error.hpp"
#include "valuescape/geometry.hpp"

// Boolean AND / OR are delegated to Boost.Geometry's set operations; this
// file owns the conversion between our ring convention (open rings, CCW
// exterior, CW holes) and Boost's closed-ring model.

namespace valuescape::geometry {

namespace {

namespace bg = boost::geometry;
using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint, false, true>;  // CCW, closed
using BgMulti = bg::model::multi_polygon<BgPolygon>;

void append_ring(bg::model::ring<BgPoint, false, true>& out, const Ring& in) {
    out.reserve(in.pts.size() + 1);
    for (const auto& p : in.pts) out.emplace_back(p.x, p.y);
    if (!in.pts.empty()) out.emplace_back(in.pts.front().x, in.pts.front().y);
}

BgPolygon to_bg(const Polygon& p) {
    BgPolygon out;
    append_ring(out.outer(), p.exterior);
    out.inners().resize(p.holes.size());
    for (std::size_t i = 0; i < p.holes.size(); ++i) append_ring(out.inners()[i], p.holes[i]);
    return out;
}

Ring from_bg_ring(const bg::model::ring<BgPoint, false, true>& in) {
    Ring out;
    const std::size_t n = in.size();
    if (n == 0) return out;
    // drop the closing duplicate
    const std::size_t last = (bg::get<0>(in.front()) == bg::get<0>(in.back()) &&
                              bg::get<1>(in.front()) == bg::get<1>(in.back()))
                                 ? n - 1
                                 : n;
    out.pts.reserve(last);
    for (std::size_t i = 0; i < last; ++i)
        out.pts.push_back(Point{bg::get<0>(in[i]), bg::get<1>(in[i])});
    return out;
}

Polygon from_bg(const BgPolygon& p) {
    Polygon out;
    out.exterior = from_bg_ring(p.outer());
    for (const auto& inner : p.inners()) {
        Ring h = from_bg_ring(inner);
        if (h.pts.size() >= 3) out.holes.push_back(std::move(h));
    }
    return out;
}

BgMulti to_bg_multi(const std::vector<Polygon>& polys, const char* side) {
    BgMulti out;
    out.reserve(polys.size());
    for (std::size_t i = 0; i < polys.size(); ++i) {
        BgPolygon p = to_bg(polys[i]);
        std::string reason;
        if (!bg::is_valid(p, reason)) {
            throw Error("intersect: polygon " + std::to_string(i) + " of input " + side +
                        " is invalid: " + reason);
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<Polygon> from_bg_multi(const BgMulti& m) {
    std::vector<Polygon> out;
    out.reserve(m.size());
    for (const auto& p : m) {
        Polygon mine = from_bg(p);
        if (mine.exterior.pts.size() >= 3) out.push_back(std::move(mine));
    }
    return out;
}

}  // namespace

std::vector<Polygon> intersect(const std::vector<Polygon>& a, const std::vector<Polygon>& b) {
    if (a.empty() || b.empty()) return {};
    const BgMulti ma = to_bg_multi(a, "a");
    const BgMulti mb = to_bg_multi(b, "b");
    BgMulti out;
    bg::intersection(ma, mb, out);
    return from_bg_multi(out);
}

std::vector<Polygon> union_all(const std::vector<Polygon>& polys) {
    if (polys.empty()) return {};
    const BgMulti m = to_bg_multi(polys, "a");
    BgMulti acc;
    for (const auto& p : m) {
        BgMulti step;
        bg::union_(acc, p, step);
        acc = std::move(step);
    }
    return from_bg_multi(acc);
}

}  // namespace valuescape::geometry
