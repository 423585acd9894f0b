#include "fazseg/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fazseg {

StructuringElement StructuringElement::line(int length, int angle_deg)
{
    if (length < 1)
        throw PreconditionError("line SE length must be >= 1");
    if (angle_deg != 0 && angle_deg != 45 && angle_deg != 90)
        throw PreconditionError("line SE angle must be 0, 45 or 90, got " +
                                std::to_string(angle_deg));
    if (length % 2 == 0)
        ++length;
    StructuringElement se;
    se.kind_ = Kind::line;
    se.length_ = length;
    se.angle_ = angle_deg;
    const int half = (length - 1) / 2;
    for (int k = -half; k <= half; ++k) {
        switch (angle_deg) {
        case 0: se.offsets_.push_back({k, 0}); break;
        case 90: se.offsets_.push_back({0, k}); break;
        default: se.offsets_.push_back({k, -k}); break;
        }
    }
    return se;
}

StructuringElement StructuringElement::disk(int radius)
{
    if (radius < 1)
        throw PreconditionError("disk SE radius must be >= 1");
    StructuringElement se;
    se.kind_ = Kind::disk;
    se.radius_ = radius;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (dx * dx + dy * dy <= radius * radius)
                se.offsets_.push_back({dx, dy});
    return se;
}

StructuringElement StructuringElement::reflected() const
{
    StructuringElement se = *this;
    for (auto& o : se.offsets_)
        o = {-o.dx, -o.dy};
    std::sort(se.offsets_.begin(), se.offsets_.end());
    return se;
}

namespace {

// For each offset o, combine dst(p) with src(p + o); out-of-frame reads as 0.
template <typename Op>
void apply_shifted(const BinaryMask& src, BinaryMask& dst, const Offset& o, Op op)
{
    const int w = src.width();
    const int h = src.height();
    auto s = src.data();
    auto d = dst.data();
    for (int y = 0; y < h; ++y) {
        const int sy = y + o.dy;
        std::uint8_t* row = d.data() + static_cast<std::size_t>(y) * w;
        if (sy < 0 || sy >= h) {
            for (int x = 0; x < w; ++x)
                row[x] = op(row[x], std::uint8_t{0});
            continue;
        }
        const std::uint8_t* srow = s.data() + static_cast<std::size_t>(sy) * w;
        const int x0 = std::max(0, -o.dx);
        const int x1 = std::min(w, w - o.dx);
        for (int x = 0; x < std::min(x0, w); ++x)
            row[x] = op(row[x], std::uint8_t{0});
        for (int x = x0; x < x1; ++x)
            row[x] = op(row[x], srow[x + o.dx]);
        for (int x = std::max(x1, 0); x < w; ++x)
            row[x] = op(row[x], std::uint8_t{0});
    }
}

} // namespace

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se)
{
    BinaryMask out(mask.geometry(), false);
    for (const auto& o : se.offsets())
        apply_shifted(mask, out, o,
                      [](std::uint8_t a, std::uint8_t b) { return std::uint8_t(a | b); });
    return out;
}

BinaryMask erode(const BinaryMask& mask, const StructuringElement& se)
{
    BinaryMask out(mask.geometry(), true);
    for (const auto& o : se.offsets())
        apply_shifted(mask, out, o,
                      [](std::uint8_t a, std::uint8_t b) { return std::uint8_t(a & b); });
    return out;
}

std::vector<Component> connected_components(const BinaryMask& mask, Connectivity connectivity)
{
    static constexpr Offset n4[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    static constexpr Offset n8[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1},
                                    {1, 1}, {-1, 1}, {1, -1}, {-1, -1}};
    const std::span<const Offset> nbrs =
        connectivity == Connectivity::four ? std::span<const Offset>(n4) : std::span<const Offset>(n8);

    const int w = mask.width();
    const int h = mask.height();
    std::vector<int> label(mask.size(), 0);
    std::vector<Component> components;
    std::vector<PointI> stack;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.test(x, y) || label[static_cast<std::size_t>(y) * w + x] != 0)
                continue;
            Component c;
            c.label = static_cast<int>(components.size()) + 1;
            label[static_cast<std::size_t>(y) * w + x] = c.label;
            stack.push_back({x, y});
            double sx = 0.0, sy = 0.0;
            while (!stack.empty()) {
                const PointI p = stack.back();
                stack.pop_back();
                c.pixels.push_back(p);
                sx += p.x + 0.5;
                sy += p.y + 0.5;
                if (p.x == 0 || p.y == 0 || p.x == w - 1 || p.y == h - 1)
                    c.touches_border = true;
                for (const auto& o : nbrs) {
                    const int nx = p.x + o.dx;
                    const int ny = p.y + o.dy;
                    if (!mask.test_or_background(nx, ny))
                        continue;
                    int& l = label[static_cast<std::size_t>(ny) * w + nx];
                    if (l == 0) {
                        l = c.label;
                        stack.push_back({nx, ny});
                    }
                }
            }
            std::sort(c.pixels.begin(), c.pixels.end(),
                      [](const PointI& a, const PointI& b) {
                          return a.y != b.y ? a.y < b.y : a.x < b.x;
                      });
            c.area_px = c.pixels.size();
            c.centroid = {sx / static_cast<double>(c.area_px), sy / static_cast<double>(c.area_px)};
            components.push_back(std::move(c));
        }
    }
    return components;
}

BinaryMask fill_holes(const BinaryMask& mask)
{
    const int w = mask.width();
    const int h = mask.height();
    BinaryMask outside(mask.geometry());
    std::vector<PointI> stack;
    auto seed = [&](int x, int y) {
        if (!mask.test(x, y) && !outside.test(x, y)) {
            outside.set(x, y);
            stack.push_back({x, y});
        }
    };
    for (int x = 0; x < w; ++x) {
        seed(x, 0);
        seed(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        seed(0, y);
        seed(w - 1, y);
    }
    while (!stack.empty()) {
        const PointI p = stack.back();
        stack.pop_back();
        const PointI nb[] = {{p.x + 1, p.y}, {p.x - 1, p.y}, {p.x, p.y + 1}, {p.x, p.y - 1}};
        for (const auto& q : nb)
            if (mask.geometry().contains(q.x, q.y))
                seed(q.x, q.y);
    }
    return complement(outside);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher) over finite samples of f.
void squared_edt_1d(const std::vector<double>& f, std::vector<double>& d,
                    std::vector<int>& v, std::vector<double>& z)
{
    const int n = static_cast<int>(f.size());
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q] == kInf)
            continue;
        while (k >= 0) {
            const int p = v[k];
            const double s =
                ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
            if (s <= z[k]) {
                --k;
            } else {
                break;
            }
        }
        ++k;
        v[k] = q;
        if (k == 0) {
            z[k] = -kInf;
        } else {
            const int p = v[k - 1];
            z[k] = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
        }
        z[k + 1] = kInf;
    }
    if (k < 0) {
        std::fill(d.begin(), d.end(), kInf);
        return;
    }
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[j + 1] < q)
            ++j;
        const double diff = q - v[j];
        d[q] = diff * diff + f[v[j]];
    }
}

} // namespace

RealRaster distance_transform(const BinaryMask& mask)
{
    if (mask.count() == mask.size())
        throw PreconditionError("distance transform needs at least one background pixel");
    const int w = mask.width();
    const int h = mask.height();
    const int n = std::max(w, h);
    std::vector<double> f, d;
    std::vector<int> v(n + 1);
    std::vector<double> z(n + 2);
    RealRaster sq(mask.geometry(), 0.0);

    f.resize(h);
    d.resize(h);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y)
            f[y] = mask.test(x, y) ? kInf : 0.0;
        squared_edt_1d(f, d, v, z);
        for (int y = 0; y < h; ++y)
            sq(x, y) = d[y];
    }
    f.resize(w);
    d.resize(w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x)
            f[x] = sq(x, y);
        squared_edt_1d(f, d, v, z);
        for (int x = 0; x < w; ++x)
            sq(x, y) = std::sqrt(d[x]);
    }
    return sq;
}

namespace {

// Neighbours in the order E, NE, N, NW, W, SW, S, SE.
constexpr Offset kRing[8] = {{1, 0}, {1, -1}, {0, -1}, {-1, -1},
                             {-1, 0}, {-1, 1}, {0, 1}, {1, 1}};

// Guo-Hall deletion test for one sub-iteration; x[0..7] are the ring neighbours.
bool guo_hall_deletable(const BinaryMask& m, int px, int py, bool first)
{
    bool x[9];
    for (int k = 0; k < 8; ++k)
        x[k] = m.test_or_background(px + kRing[k].dx, py + kRing[k].dy);
    x[8] = x[0];
    int crossings = 0;
    for (int i = 0; i < 8; i += 2)
        crossings += !x[i] && (x[i + 1] || x[i + 2]);
    if (crossings != 1)
        return false;
    int n1 = 0, n2 = 0;
    for (int i = 0; i < 8; i += 2) {
        n1 += x[i] || x[i + 1];
        n2 += x[i + 1] || x[i + 2];
    }
    const int n = std::min(n1, n2);
    if (n < 2 || n > 3)
        return false;
    if (first)
        return !((x[1] || x[2] || !x[7]) && x[0]);
    return !((x[5] || x[6] || !x[3]) && x[4]);
}

// Yokoi connectivity number for 8-connected foreground; 1 means p is a simple point.
int connectivity_number(const BinaryMask& m, int x, int y)
{
    int nb[9];
    for (int k = 0; k < 8; ++k)
        nb[k] = m.test_or_background(x + kRing[k].dx, y + kRing[k].dy) ? 0 : 1;
    nb[8] = nb[0];
    int sum = 0;
    for (int k = 0; k < 8; k += 2)
        sum += nb[k] - nb[k] * nb[k + 1] * nb[k + 2];
    return sum;
}

bool in_full_block(const BinaryMask& m, int x, int y)
{
    for (int oy = -1; oy <= 0; ++oy)
        for (int ox = -1; ox <= 0; ++ox)
            if (m.test_or_background(x + ox, y + oy) && m.test_or_background(x + ox + 1, y + oy) &&
                m.test_or_background(x + ox, y + oy + 1) &&
                m.test_or_background(x + ox + 1, y + oy + 1))
                return true;
    return false;
}

// Sequentially removes simple pixels that sit in a 2x2 block of set pixels.
bool break_blocks(BinaryMask& m)
{
    bool changed = false;
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            if (m.test(x, y) && in_full_block(m, x, y) && connectivity_number(m, x, y) == 1) {
                m.set(x, y, false);
                changed = true;
            }
    return changed;
}

} // namespace

BinaryMask skeletonize(const BinaryMask& mask)
{
    BinaryMask out = mask;
    std::vector<PointI> doomed;
    bool changed = true;
    while (changed) {
        changed = false;
        for (bool first : {true, false}) {
            doomed.clear();
            for (int y = 0; y < out.height(); ++y)
                for (int x = 0; x < out.width(); ++x)
                    if (out.test(x, y) && guo_hall_deletable(out, x, y, first))
                        doomed.push_back({x, y});
            for (const auto& p : doomed)
                out.set(p.x, p.y, false);
            changed = changed || !doomed.empty();
        }
        if (!changed)
            changed = break_blocks(out);
    }
    return out;
}

BinaryMask inner_boundary(const BinaryMask& mask)
{
    return mask_difference(mask, erode(mask, StructuringElement::disk(1)));
}

} // namespace fazseg
