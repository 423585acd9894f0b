#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fazseg/error.hpp"

namespace fazseg {

/// Isotropic physical pixel size. Cropping never changes it.
struct PhysicalScale {
    double mm_per_px = 6.0 / 420.0;
    double source_extent_mm = 6.0;
    int source_side_px = 420;

    /// Scale of a square scan `extent_mm` wide exported at `side_px` pixels.
    static PhysicalScale from_scan(double extent_mm, int side_px);

    friend bool operator==(const PhysicalScale&, const PhysicalScale&) = default;
};

/// Raster dimensions plus the physical scale shared by images and masks.
struct Geometry {
    int width = 0;
    int height = 0;
    PhysicalScale scale;

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }

    friend bool operator==(const Geometry&, const Geometry&) = default;
};

/// Row-major raster of T. Values are owned and copied with the object.
template <typename T>
class Raster {
public:
    Raster() = default;
    Raster(Geometry geometry, T fill)
        : geometry_(geometry), data_(geometry.pixel_count(), fill) {}
    Raster(Geometry geometry, std::vector<T> data)
        : geometry_(geometry), data_(std::move(data))
    {
        if (data_.size() != geometry_.pixel_count())
            throw PreconditionError("raster data size does not match width*height");
    }

    const Geometry& geometry() const { return geometry_; }
    int width() const { return geometry_.width; }
    int height() const { return geometry_.height; }
    const PhysicalScale& scale() const { return geometry_.scale; }
    std::size_t size() const { return data_.size(); }

    T operator()(int x, int y) const { return data_[index(x, y)]; }
    T& operator()(int x, int y) { return data_[index(x, y)]; }

    std::span<const T> data() const { return data_; }
    std::span<T> data() { return data_; }

    friend bool operator==(const Raster&, const Raster&) = default;

protected:
    std::size_t index(int x, int y) const
    {
        return static_cast<std::size_t>(y) * geometry_.width + x;
    }

    Geometry geometry_;
    std::vector<T> data_;
};

/// 8-bit single-channel intensity image. Width and height are at least 3.
class GrayImage : public Raster<std::uint8_t> {
public:
    GrayImage() = default;
    GrayImage(Geometry geometry, std::uint8_t fill = 0);
    GrayImage(Geometry geometry, std::vector<std::uint8_t> pixels);
};

/// Boolean raster stored one byte per pixel, 0 or 1.
class BinaryMask : public Raster<std::uint8_t> {
public:
    BinaryMask() = default;
    explicit BinaryMask(Geometry geometry, bool fill = false)
        : Raster(geometry, static_cast<std::uint8_t>(fill)) {}
    BinaryMask(Geometry geometry, std::vector<std::uint8_t> bits);

    bool test(int x, int y) const { return (*this)(x, y) != 0; }
    /// Out-of-frame positions read as background.
    bool test_or_background(int x, int y) const
    {
        return geometry_.contains(x, y) && (*this)(x, y) != 0;
    }
    void set(int x, int y, bool value = true) { (*this)(x, y) = value ? 1 : 0; }

    std::size_t count() const;
    bool empty() const { return count() == 0; }
};

/// Real-valued raster (distance maps, gradient magnitudes).
using RealRaster = Raster<double>;

BinaryMask complement(const BinaryMask& mask);
BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_intersection(const BinaryMask& a, const BinaryMask& b);
/// Pixels of `a` not in `b`.
BinaryMask mask_difference(const BinaryMask& a, const BinaryMask& b);

/// Interior rectangle after removing the given margins. Scale is unchanged.
GrayImage crop(const GrayImage& img, int left, int top, int right, int bottom);
BinaryMask crop(const BinaryMask& mask, int left, int top, int right, int bottom);

/// Places `mask` into a larger frame at (left, top); the rest is background.
BinaryMask embed(const BinaryMask& mask, const Geometry& frame, int left, int top);

struct PointD {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const PointD&, const PointD&) = default;
};

/// Closed polygon in pixel coordinates (pixel (i,j) covers [i,i+1)x[j,j+1)).
struct Polygon {
    std::vector<PointD> vertices;
};

struct RasterizedPolygon {
    BinaryMask mask;
    /// Set when no pixel center is covered because the polygon lies outside the frame.
    bool outside_frame = false;
};

/// Even-odd fill of pixel centers; centers lying exactly on an edge are set.
RasterizedPolygon rasterize_polygon(const Polygon& poly, const Geometry& geometry);

} // namespace fazseg
