#include "fazseg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace fazseg::geometry {

namespace {

double cross(const PointD& o, const PointD& a, const PointD& b)
{
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double dist(const PointD& a, const PointD& b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

} // namespace

std::vector<PointD> convex_hull(std::vector<PointD> pts)
{
    std::sort(pts.begin(), pts.end(), [](const PointD& a, const PointD& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3)
        return pts;
    std::vector<PointD> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0)
            --k;
        hull[k++] = p;
    }
    const std::size_t lower = k + 1;
    for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], *it) <= 0.0)
            --k;
        hull[k++] = *it;
    }
    hull.resize(k - 1);
    return hull;
}

double diameter(std::span<const PointD> hull)
{
    const std::size_t n = hull.size();
    if (n < 2)
        return 0.0;
    if (n == 2)
        return dist(hull[0], hull[1]);
    double best = 0.0;
    std::size_t j = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const PointD& a = hull[i];
        const PointD& b = hull[(i + 1) % n];
        // Advance j while the triangle area against edge (a,b) keeps growing.
        while (std::abs(cross(a, b, hull[(j + 1) % n])) > std::abs(cross(a, b, hull[j])))
            j = (j + 1) % n;
        const PointD& next = hull[(j + 1) % n];
        best = std::max({best, dist(a, hull[j]), dist(b, hull[j]), dist(a, next), dist(b, next)});
    }
    return best;
}

double min_width(std::span<const PointD> hull)
{
    const std::size_t n = hull.size();
    if (n < 3)
        return 0.0;
    double best = std::numeric_limits<double>::infinity();
    std::size_t j = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const PointD& a = hull[i];
        const PointD& b = hull[(i + 1) % n];
        while (std::abs(cross(a, b, hull[(j + 1) % n])) > std::abs(cross(a, b, hull[j])))
            j = (j + 1) % n;
        best = std::min(best, std::abs(cross(a, b, hull[j])) / dist(a, b));
    }
    return best;
}

double perimeter(std::span<const PointD> polygon)
{
    double total = 0.0;
    for (std::size_t i = 0; i < polygon.size(); ++i)
        total += dist(polygon[i], polygon[(i + 1) % polygon.size()]);
    return total;
}

double chain_metric_perimeter(std::span<const PointD> polygon)
{
    const double diag_extra = std::sqrt(2.0) - 1.0;
    double total = 0.0;
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        const PointD& a = polygon[i];
        const PointD& b = polygon[(i + 1) % polygon.size()];
        const double dx = std::abs(b.x - a.x);
        const double dy = std::abs(b.y - a.y);
        total += std::max(dx, dy) + diag_extra * std::min(dx, dy);
    }
    return total;
}

namespace {

Circle circle_from(const PointD& a, const PointD& b)
{
    return {{(a.x + b.x) / 2.0, (a.y + b.y) / 2.0}, dist(a, b) / 2.0};
}

Circle circle_from(const PointD& a, const PointD& b, const PointD& c)
{
    const double bx = b.x - a.x, by = b.y - a.y;
    const double cx = c.x - a.x, cy = c.y - a.y;
    const double d = 2.0 * (bx * cy - by * cx);
    if (d == 0.0) {
        // Collinear: the widest pair spans the circle.
        Circle best = circle_from(a, b);
        for (const Circle& cand : {circle_from(a, c), circle_from(b, c)})
            if (cand.radius > best.radius)
                best = cand;
        return best;
    }
    const double b2 = bx * bx + by * by;
    const double c2 = cx * cx + cy * cy;
    const PointD center{a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d};
    return {center, dist(center, a)};
}

bool contains(const Circle& c, const PointD& p)
{
    return dist(c.center, p) <= c.radius * (1.0 + 1e-12) + 1e-12;
}

} // namespace

Circle min_enclosing_circle(std::span<const PointD> points)
{
    if (points.empty())
        return {};
    std::vector<PointD> p(points.begin(), points.end());
    // Fisher-Yates with a fixed 64-bit LCG: identical order on every platform.
    std::uint64_t state = 0x9E3779B97F4A7C15ull;
    for (std::size_t i = p.size(); i > 1; --i) {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        std::swap(p[i - 1], p[(state >> 33) % i]);
    }

    Circle c{p[0], 0.0};
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (contains(c, p[i]))
            continue;
        c = {p[i], 0.0};
        for (std::size_t j = 0; j < i; ++j) {
            if (contains(c, p[j]))
                continue;
            c = circle_from(p[i], p[j]);
            for (std::size_t k = 0; k < j; ++k)
                if (!contains(c, p[k]))
                    c = circle_from(p[i], p[j], p[k]);
        }
    }
    return c;
}

} // namespace fazseg::geometry
