#pragma once

#include <span>
#include <vector>

#include "fazseg/image.hpp"

namespace fazseg::geometry {

/// Convex hull in counter-clockwise order without collinear points (monotone chain).
std::vector<PointD> convex_hull(std::vector<PointD> points);

/// Largest distance between any two hull vertices, by rotating calipers.
double diameter(std::span<const PointD> hull);

/// Smallest distance between two parallel supporting lines of the hull.
double min_width(std::span<const PointD> hull);

double perimeter(std::span<const PointD> polygon);

/// Closed-polygon length where each edge (dx, dy) costs max(|dx|,|dy|) + (sqrt2-1) min(|dx|,|dy|),
/// the norm in which 8-connected chain steps have lengths 1 and sqrt2.
double chain_metric_perimeter(std::span<const PointD> polygon);

struct Circle {
    PointD center;
    double radius = 0.0;
};

/// Smallest circle containing all points (Welzl, randomized incremental).
/// The shuffle uses a fixed seed so results are reproducible.
Circle min_enclosing_circle(std::span<const PointD> points);

} // namespace fazseg::geometry
