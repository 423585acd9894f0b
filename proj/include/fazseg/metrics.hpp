#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "fazseg/image.hpp"
#include "fazseg/morphology.hpp"

namespace fazseg {

/// The fifteen FAZ dimensions. Lengths in mm, area in mm^2, orientation in degrees.
struct FazMeasurements {
    double area = 0.0;
    double diameter = 0.0;
    double major_axis = 0.0;
    double minor_axis = 0.0;
    double perimeter = 0.0;
    double eccentricity = 0.0;
    double f_min = 0.0;
    double f_max = 0.0;
    double inner_circle_radius = 0.0;
    double circumcircle_radius = 0.0;
    double orientation = 0.0;
    double tortuosity = 1.0;
    double vad = 0.0;
    double vdi = 0.0;
    double circularity = 0.0;

    /// Non-fatal conditions, e.g. "vdi: empty vessel skeleton".
    std::vector<std::string> warnings;
};

/// JSON with the CSV column names as keys.
void to_json(nlohmann::json& j, const FazMeasurements& m);

/// Failure computing one measurement; `field()` names it.
class MeasurementError : public Error {
public:
    MeasurementError(std::string field, const std::string& message);
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

double region_area(const BinaryMask& mask);
double equivalent_diameter(double area_mm2);

/// Length of the outer 8-connected boundary chain (steps 1 and sqrt2), in mm.
/// Regions under 4 px report their pixel-edge perimeter instead.
double boundary_perimeter(const BinaryMask& mask);

/// Boundary chain vertices in pixel-centre coordinates, as visited by Moore tracing
/// starting at the first set pixel in raster order.
std::vector<PointI> trace_boundary(const BinaryMask& mask);

struct EllipseFit {
    double major = 0.0;
    double minor = 0.0;
    /// Degrees, y axis up, in (-90, 90].
    double orientation = 0.0;
    double eccentricity = 0.0;
};
EllipseFit ellipse_fit(const BinaryMask& mask);

struct FeretDiameters {
    double f_min = 0.0;
    double f_max = 0.0;
};
FeretDiameters feret_diameters(const BinaryMask& mask);

/// Every set pixel contributes its four unit-square corners; returns their convex hull.
std::vector<PointD> pixel_corner_hull(const BinaryMask& mask);

double inscribed_circle_radius(const BinaryMask& mask);
double circumscribed_circle_radius(const BinaryMask& mask);

/// Boundary length over convex-hull length, both in the chain metric.
double tortuosity(const BinaryMask& mask);

double circularity(double area_mm2, double perimeter_mm);

/// Between-class-variance-maximising threshold; foreground is value > threshold.
/// Returns 255 when the histogram has a single occupied level.
int otsu_threshold(std::span<const std::size_t, 256> histogram);

/// Skeleton length: axis adjacencies count 1, diagonal ones sqrt2 unless bridged by an
/// axis path.
double skeleton_length_px(const BinaryMask& skeleton);

struct VesselMetrics {
    double vad = 0.0;
    double vdi = 0.0;
    bool vdi_defined = false;
    BinaryMask vessels;
};

/// Vessel area density and vessel diameter index over the frame minus the FAZ.
VesselMetrics vad_vdi(const GrayImage& image, const BinaryMask& faz_mask);

FazMeasurements measure(const BinaryMask& mask, const GrayImage& image);

} // namespace fazseg
