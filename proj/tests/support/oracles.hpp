#pragma once

// Brute-force reference implementations used to cross-check the library.

#include <cmath>
#include <deque>
#include <limits>
#include <vector>

#include "fazseg/image.hpp"
#include "phantom.hpp"

namespace fazseg::testing {

inline Geometry frame(int w, int h, double mm_per_px = 6.0 / 420.0)
{
    Geometry g{w, h, {}};
    g.scale.mm_per_px = mm_per_px;
    return g;
}

inline BinaryMask random_mask(Rng& rng, int w, int h, double density)
{
    BinaryMask m(frame(w, h));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            m.set(x, y, rng.uniform() < density);
    return m;
}

/// All-pairs nearest background centre.
inline RealRaster brute_distance(const BinaryMask& m)
{
    RealRaster out(m.geometry(), 0.0);
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            if (!m.test(x, y))
                continue;
            double best = std::numeric_limits<double>::infinity();
            for (int v = 0; v < m.height(); ++v)
                for (int u = 0; u < m.width(); ++u)
                    if (!m.test(u, v))
                        best = std::min(best, std::sqrt(double((u - x) * (u - x) +
                                                               (v - y) * (v - y))));
            out(x, y) = best;
        }
    return out;
}

/// Even-odd crossing test, with points on an edge counted inside.
inline bool point_in_polygon(const Polygon& poly, double px, double py)
{
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const PointD a = v[j], b = v[i];
        const double cross = (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
        if (cross == 0.0 && px >= std::min(a.x, b.x) && px <= std::max(a.x, b.x) &&
            py >= std::min(a.y, b.y) && py <= std::max(a.y, b.y))
            return true;
        if ((a.y > py) != (b.y > py)) {
            const double xc = a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y);
            if (px < xc)
                inside = !inside;
        }
    }
    return inside;
}

inline BinaryMask brute_rasterize(const Polygon& poly, const Geometry& g)
{
    BinaryMask m(g);
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x)
            m.set(x, y, point_in_polygon(poly, x + 0.5, y + 0.5));
    return m;
}

/// Background reachable from the border by 4-steps stays background; all else is set.
inline BinaryMask border_flood_fill(const BinaryMask& m)
{
    const int w = m.width(), h = m.height();
    std::vector<char> seen(m.size(), 0);
    std::deque<std::pair<int, int>> queue;
    auto push = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= w || y >= h || m.test(x, y) || seen[y * w + x])
            return;
        seen[y * w + x] = 1;
        queue.emplace_back(x, y);
    };
    for (int x = 0; x < w; ++x) {
        push(x, 0);
        push(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        push(0, y);
        push(w - 1, y);
    }
    while (!queue.empty()) {
        auto [x, y] = queue.front();
        queue.pop_front();
        push(x + 1, y);
        push(x - 1, y);
        push(x, y + 1);
        push(x, y - 1);
    }
    BinaryMask out(m.geometry());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.set(x, y, !seen[y * w + x]);
    return out;
}

/// Number of flood-fill regions of set pixels.
inline int flood_component_count(const BinaryMask& m, bool eight)
{
    const int w = m.width(), h = m.height();
    std::vector<char> seen(m.size(), 0);
    int count = 0;
    for (int sy = 0; sy < h; ++sy)
        for (int sx = 0; sx < w; ++sx) {
            if (!m.test(sx, sy) || seen[sy * w + sx])
                continue;
            ++count;
            std::vector<std::pair<int, int>> stack{{sx, sy}};
            seen[sy * w + sx] = 1;
            while (!stack.empty()) {
                auto [x, y] = stack.back();
                stack.pop_back();
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if ((dx == 0 && dy == 0) || (!eight && dx != 0 && dy != 0))
                            continue;
                        const int u = x + dx, v = y + dy;
                        if (u < 0 || v < 0 || u >= w || v >= h || !m.test(u, v) ||
                            seen[v * w + u])
                            continue;
                        seen[v * w + u] = 1;
                        stack.emplace_back(u, v);
                    }
            }
        }
    return count;
}

/// Disk of pixel centres within `r` of (cx, cy).
inline BinaryMask disk_mask(const Geometry& g, double cx, double cy, double r)
{
    BinaryMask m(g);
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x)
            m.set(x, y, std::hypot(x + 0.5 - cx, y + 0.5 - cy) <= r);
    return m;
}

inline BinaryMask rect_mask(const Geometry& g, int x0, int y0, int w, int h)
{
    BinaryMask m(g);
    for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x)
            m.set(x, y);
    return m;
}

} // namespace fazseg::testing
