#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace valuescape::geometry {

struct Point {
    double x = 0.0;  // meters on the local projection plane
    double y = 0.0;
};

inline bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }

// Ring vertices are stored without a closing duplicate. Exterior rings are
// counter-clockwise, holes clockwise.
struct Ring {
    std::vector<Point> pts;
};

struct Polygon {
    Ring exterior;
    std::vector<Ring> holes;
};

// --- robust predicates -------------------------------------------------------
// Sign of the orientation / in-circle determinant: +1, 0 or -1. A floating
// point filter decides the easy cases; near-zero determinants are recomputed
// in exact rational arithmetic, so the sign is always correct.
int orient2d(const Point& a, const Point& b, const Point& c);
// a, b, c counter-clockwise; +1 when d lies strictly inside their circumcircle
int incircle(const Point& a, const Point& b, const Point& c, const Point& d);

// --- Delaunay ----------------------------------------------------------------

struct Triangulation {
    std::vector<Point> points;                    // the input, verbatim
    std::vector<std::array<int, 3>> triangles;    // CCW, indices into points
    std::vector<double> circumradius;             // per triangle
};

// Bowyer-Watson over a ghost-vertex convex hull. Exactly duplicated input
// points are collapsed onto their first occurrence. Cocircular ties resolve
// by insertion index (later points count as outside earlier circles).
// Throws "degenerate cluster" when fewer than 3 distinct points remain or
// all points are collinear.
Triangulation delaunay(std::span<const Point> pts);

double triangle_circumradius(const Point& a, const Point& b, const Point& c);

// --- alpha shapes ------------------------------------------------------------

struct AlphaParam {
    bool auto_mode = true;
    double alpha = 0.0;  // curvature parameter; triangle kept iff circumradius <= 1/alpha

    static AlphaParam autoselect() { return AlphaParam{true, 0.0}; }
    static AlphaParam fixed(double alpha) { return AlphaParam{false, alpha}; }
};

struct AlphaShapeResult {
    std::vector<Polygon> polygons;
    double alpha = 0.0;         // the alpha actually used (0 means unbounded radius)
    double radius_bound = 0.0;  // 1/alpha, infinity() when alpha == 0
    std::vector<double> dropped_sliver_areas;  // parts removed by the sliver filter
};

constexpr double kSliverMinAreaM2 = 25.0;

// Triangles with circumradius <= 1/alpha are kept; the union's boundary is
// stitched into polygons. Auto mode picks the smallest radius bound from
// the sorted circumradius set whose surviving polygons still cover every
// input point (inside-or-on, 1e-9 m tolerance).
AlphaShapeResult alpha_shape(std::span<const Point> pts, AlphaParam param,
                             double sliver_min_area = kSliverMinAreaM2);

// --- boolean operations and measures ----------------------------------------

// Boolean AND of two polygon sets. Input rings must be simple and correctly
// oriented; offenders are reported by index.
std::vector<Polygon> intersect(const std::vector<Polygon>& a, const std::vector<Polygon>& b);

std::vector<Polygon> union_all(const std::vector<Polygon>& polys);

double polygon_area(const Polygon& p);
double total_area(const std::vector<Polygon>& polys);

bool point_in_polygon(const Point& pt, const Polygon& poly, double boundary_tol = 1e-9);
bool point_in_polygons(const Point& pt, const std::vector<Polygon>& polys,
                       double boundary_tol = 1e-9);

double ring_signed_area(const Ring& r);

// One value's polygons for one spatial cluster.
struct ValuePolygonSet {
    std::string value_id;
    int cluster_id = -1;
    std::vector<Polygon> polygons;
    double alpha = 0.0;
};

}  // namespace valuescape::geometry
