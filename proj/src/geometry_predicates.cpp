#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <limits>

#include "valuescape/geometry.hpp"

namespace valuescape::geometry {

namespace {

// Shewchuk's static filter constants for double precision.
constexpr double kEps = 1.1102230246251565e-16;  // 2^-53
constexpr double kCcwErrBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kIccErrBound = (10.0 + 96.0 * kEps) * kEps;

using BigRat = boost::multiprecision::cpp_rational;

int sign_of(const BigRat& v) {
    if (v > 0) return 1;
    if (v < 0) return -1;
    return 0;
}

int orient2d_exact(const Point& a, const Point& b, const Point& c) {
    const BigRat ax(a.x), ay(a.y), bx(b.x), by(b.y), cx(c.x), cy(c.y);
    const BigRat det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
    return sign_of(det);
}

int incircle_exact(const Point& a, const Point& b, const Point& c, const Point& d) {
    const BigRat adx = BigRat(a.x) - BigRat(d.x);
    const BigRat ady = BigRat(a.y) - BigRat(d.y);
    const BigRat bdx = BigRat(b.x) - BigRat(d.x);
    const BigRat bdy = BigRat(b.y) - BigRat(d.y);
    const BigRat cdx = BigRat(c.x) - BigRat(d.x);
    const BigRat cdy = BigRat(c.y) - BigRat(d.y);
    const BigRat alift = adx * adx + ady * ady;
    const BigRat blift = bdx * bdx + bdy * bdy;
    const BigRat clift = cdx * cdx + cdy * cdy;
    const BigRat det = alift * (bdx * cdy - bdy * cdx) + blift * (cdx * ady - cdy * adx) +
                       clift * (adx * bdy - ady * bdx);
    return sign_of(det);
}

}  // namespace

int orient2d(const Point& a, const Point& b, const Point& c) {
    const double detleft = (b.x - a.x) * (c.y - a.y);
    const double detright = (b.y - a.y) * (c.x - a.x);
    const double det = detleft - detright;
    double detsum;
    if (detleft > 0.0) {
        if (detright <= 0.0) return det > 0.0 ? 1 : (det < 0.0 ? -1 : 0);
        detsum = detleft + detright;
    } else if (detleft < 0.0) {
        if (detright >= 0.0) return det > 0.0 ? 1 : (det < 0.0 ? -1 : 0);
        detsum = -detleft - detright;
    } else {
        return det > 0.0 ? 1 : (det < 0.0 ? -1 : 0);
    }
    if (det >= kCcwErrBound * detsum || -det >= kCcwErrBound * detsum)
        return det > 0.0 ? 1 : -1;
    return orient2d_exact(a, b, c);
}

int incircle(const Point& a, const Point& b, const Point& c, const Point& d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;

    const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
    const double cdxady = cdx * ady, adxcdy = adx * cdy;
    const double adxbdy = adx * bdy, bdxady = bdx * ady;
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;

    const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) +
                       clift * (adxbdy - bdxady);
    const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                             (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                             (std::abs(adxbdy) + std::abs(bdxady)) * clift;
    const double errbound = kIccErrBound * permanent;
    if (det > errbound || -det > errbound) return det > 0.0 ? 1 : -1;
    return incircle_exact(a, b, c, d);
}

double triangle_circumradius(const Point& a, const Point& b, const Point& c) {
    const double abx = b.x - a.x, aby = b.y - a.y;
    const double acx = c.x - a.x, acy = c.y - a.y;
    const double cross = abx * acy - aby * acx;
    if (cross == 0.0) return std::numeric_limits<double>::infinity();
    const double ab2 = abx * abx + aby * aby;
    const double ac2 = acx * acx + acy * acy;
    const double ux = (acy * ab2 - aby * ac2) / (2.0 * cross);
    const double uy = (abx * ac2 - acx * ab2) / (2.0 * cross);
    return std::sqrt(ux * ux + uy * uy);
}

}  // namespace valuescape::geometry
