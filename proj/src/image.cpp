#include "fazseg/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fazseg {

PhysicalScale PhysicalScale::from_scan(double extent_mm, int side_px)
{
    if (!(extent_mm > 0.0) || side_px <= 0)
        throw PreconditionError("scan extent and side must be positive");
    return {extent_mm / side_px, extent_mm, side_px};
}

namespace {

void check_image_geometry(const Geometry& g)
{
    if (g.width < 3 || g.height < 3)
        throw PreconditionError("image must be at least 3x3, got " + std::to_string(g.width) +
                                "x" + std::to_string(g.height));
    if (!(g.scale.mm_per_px > 0.0))
        throw PreconditionError("mm_per_px must be positive");
}

void check_same_geometry(const BinaryMask& a, const BinaryMask& b)
{
    if (a.geometry() != b.geometry())
        throw GeometryMismatch("mask geometries differ");
}

template <typename Op>
BinaryMask combine(const BinaryMask& a, const BinaryMask& b, Op op)
{
    check_same_geometry(a, b);
    BinaryMask out(a.geometry());
    auto da = a.data();
    auto db = b.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = op(da[i] != 0, db[i] != 0) ? 1 : 0;
    return out;
}

template <typename R>
R crop_raster(const R& src, int left, int top, int right, int bottom)
{
    if (left < 0 || top < 0 || right < 0 || bottom < 0)
        throw PreconditionError("crop margins must be non-negative");
    const int w = src.width() - left - right;
    const int h = src.height() - top - bottom;
    if (w < 3 || h < 3)
        throw PreconditionError("crop leaves " + std::to_string(w) + "x" + std::to_string(h) +
                                " pixels, need at least 3x3");
    Geometry g{w, h, src.scale()};
    R out(g);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out(x, y) = src(x + left, y + top);
    return out;
}

} // namespace

GrayImage::GrayImage(Geometry geometry, std::uint8_t fill) : Raster(geometry, fill)
{
    check_image_geometry(geometry_);
}

GrayImage::GrayImage(Geometry geometry, std::vector<std::uint8_t> pixels)
    : Raster(geometry, std::move(pixels))
{
    check_image_geometry(geometry_);
}

BinaryMask::BinaryMask(Geometry geometry, std::vector<std::uint8_t> bits)
    : Raster(geometry, std::move(bits))
{
    for (auto& b : data_)
        b = b != 0 ? 1 : 0;
}

std::size_t BinaryMask::count() const
{
    return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

BinaryMask complement(const BinaryMask& mask)
{
    BinaryMask out(mask.geometry());
    auto src = mask.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = src[i] ? 0 : 1;
    return out;
}

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b)
{
    return combine(a, b, [](bool p, bool q) { return p || q; });
}

BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b)
{
    return combine(a, b, [](bool p, bool q) { return p && q; });
}

BinaryMask mask_difference(const BinaryMask& a, const BinaryMask& b)
{
    return combine(a, b, [](bool p, bool q) { return p && !q; });
}

GrayImage crop(const GrayImage& img, int left, int top, int right, int bottom)
{
    return crop_raster(img, left, top, right, bottom);
}

BinaryMask crop(const BinaryMask& mask, int left, int top, int right, int bottom)
{
    return crop_raster(mask, left, top, right, bottom);
}

BinaryMask embed(const BinaryMask& mask, const Geometry& frame, int left, int top)
{
    BinaryMask out(frame);
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.test(x, y) && frame.contains(x + left, y + top))
                out.set(x + left, y + top);
    return out;
}

namespace {

// Exact collinearity with bounding-box containment.
bool on_segment(const PointD& a, const PointD& b, double px, double py)
{
    const double cross = (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
    if (cross != 0.0)
        return false;
    return px >= std::min(a.x, b.x) && px <= std::max(a.x, b.x) && py >= std::min(a.y, b.y) &&
           py <= std::max(a.y, b.y);
}

} // namespace

RasterizedPolygon rasterize_polygon(const Polygon& poly, const Geometry& geometry)
{
    const auto& v = poly.vertices;
    if (v.size() < 3)
        throw PreconditionError("polygon needs at least 3 vertices");

    RasterizedPolygon result{BinaryMask(geometry), false};
    BinaryMask& mask = result.mask;
    const std::size_t n = v.size();
    std::vector<double> crossings;

    for (int j = 0; j < geometry.height; ++j) {
        const double yc = j + 0.5;
        crossings.clear();
        for (std::size_t e = 0; e < n; ++e) {
            const PointD& a = v[e];
            const PointD& b = v[(e + 1) % n];
            if ((a.y > yc) == (b.y > yc))
                continue;
            crossings.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
        }
        std::sort(crossings.begin(), crossings.end());
        for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
            const int i0 = std::max(0, static_cast<int>(std::ceil(crossings[k] - 0.5)));
            const int i1 =
                std::min(geometry.width - 1, static_cast<int>(std::floor(crossings[k + 1] - 0.5)));
            for (int i = i0; i <= i1; ++i)
                mask.set(i, j);
        }
    }

    // Closed region: centers exactly on an edge belong to it.
    for (std::size_t e = 0; e < n; ++e) {
        const PointD& a = v[e];
        const PointD& b = v[(e + 1) % n];
        const int j0 = std::max(0, static_cast<int>(std::ceil(std::min(a.y, b.y) - 0.5)));
        const int j1 =
            std::min(geometry.height - 1, static_cast<int>(std::floor(std::max(a.y, b.y) - 0.5)));
        for (int j = j0; j <= j1; ++j) {
            const double yc = j + 0.5;
            int i0, i1;
            if (a.y == b.y) {
                i0 = static_cast<int>(std::ceil(std::min(a.x, b.x) - 0.5));
                i1 = static_cast<int>(std::floor(std::max(a.x, b.x) - 0.5));
            } else {
                const double x = a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y);
                i0 = static_cast<int>(std::floor(x - 0.5)) - 1;
                i1 = i0 + 3;
            }
            i0 = std::max(i0, 0);
            i1 = std::min(i1, geometry.width - 1);
            for (int i = i0; i <= i1; ++i)
                if (on_segment(a, b, i + 0.5, yc))
                    mask.set(i, j);
        }
    }

    result.outside_frame = mask.empty();
    return result;
}

} // namespace fazseg
