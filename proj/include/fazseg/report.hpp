#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fazseg/metrics.hpp"
#include "fazseg/validation.hpp"

namespace fazseg::report {

/// Fixed column order of the measurement CSV.
inline constexpr std::array<std::string_view, 16> kMeasurementColumns = {
    "filename",        "area_mm2",
    "diameter_mm",     "major_axis_mm",
    "minor_axis_mm",   "perimeter_mm",
    "eccentricity",    "fmin_mm",
    "fmax_mm",         "inner_circle_radius_mm",
    "circumcircle_radius_mm", "orientation_deg",
    "tortuosity",      "vad",
    "vdi_mm",          "circularity"};

/// Six significant digits, '.' separator, independent of the global locale.
std::string format_number(double value);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_field(std::string_view text);

std::string measurement_header();
std::string measurement_row(std::string_view filename, const FazMeasurements& m);

struct ValidationRow {
    std::string filename;
    AgreementReport agreement;
};

struct ValidationSummary {
    double mean_dsc = 0.0;
    double mean_ssim = 0.0;
    double optimal_fraction = 0.0;
    /// Pearson r and Bland-Altman series for area, perimeter and circularity; absent when
    /// fewer than the required pairs exist or a series is constant.
    std::array<std::optional<SeriesAgreement>, 3> series;
};

inline constexpr std::array<std::string_view, 3> kSeriesMetrics = {"area", "perimeter",
                                                                   "circularity"};

std::string validation_header();
std::string validation_row(const ValidationRow& row);
std::string validation_footer(const ValidationSummary& summary);

/// metric,filename,mean,diff rows for external plotting.
std::string bland_altman_csv(const ValidationSummary& summary,
                             const std::vector<std::string>& filenames);

} // namespace fazseg::report
