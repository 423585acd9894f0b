#pragma once

#include <vector>

#include "fazseg/image.hpp"

namespace fazseg {

struct Offset {
    int dx = 0;
    int dy = 0;
    friend auto operator<=>(const Offset&, const Offset&) = default;
};

/// Flat structuring element: a line at 0/45/90 degrees or a discrete disk.
class StructuringElement {
public:
    enum class Kind { line, disk };

    /// Even lengths are rounded up so the line stays centred on the origin.
    /// 45 degrees follows the image anti-diagonal: offsets (k, -k).
    static StructuringElement line(int length, int angle_deg);
    /// All (dx, dy) with dx^2 + dy^2 <= radius^2.
    static StructuringElement disk(int radius);

    Kind kind() const { return kind_; }
    int length() const { return length_; }
    int angle() const { return angle_; }
    int radius() const { return radius_; }
    const std::vector<Offset>& offsets() const { return offsets_; }

    StructuringElement reflected() const;

private:
    Kind kind_ = Kind::disk;
    int length_ = 1;
    int angle_ = 0;
    int radius_ = 0;
    std::vector<Offset> offsets_;
};

/// Out-of-frame pixels read as background for both operators.
BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se);
BinaryMask erode(const BinaryMask& mask, const StructuringElement& se);

enum class Connectivity { four = 4, eight = 8 };

struct PointI {
    int x = 0;
    int y = 0;
    friend auto operator<=>(const PointI&, const PointI&) = default;
};

struct Component {
    int label = 0;
    std::vector<PointI> pixels;
    std::size_t area_px = 0;
    /// Mean of pixel centres (x + 0.5, y + 0.5).
    PointD centroid;
    bool touches_border = false;
};

/// Labels start at 1 and follow the raster position of each component's first pixel,
/// i.e. ordered by (min y, then min x).
std::vector<Component> connected_components(const BinaryMask& mask, Connectivity connectivity);

/// Sets every background pixel not 4-connected to the frame border.
BinaryMask fill_holes(const BinaryMask& mask);

/// Exact Euclidean distance from each set pixel centre to the nearest in-frame background
/// pixel centre; zero on background. Throws if the mask has no background pixel.
RealRaster distance_transform(const BinaryMask& mask);

/// Topology-preserving two-subiteration parallel thinning (Guo-Hall) to a one-pixel-wide
/// 8-connected medial axis.
/// Idempotent.
BinaryMask skeletonize(const BinaryMask& mask);

/// mask \ erode(mask, disk(1)).
BinaryMask inner_boundary(const BinaryMask& mask);

} // namespace fazseg
