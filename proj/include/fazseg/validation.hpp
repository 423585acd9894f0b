#pragma once

#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fazseg/image.hpp"

namespace fazseg {

enum class AreaLabel { under, optimal, over };
std::string_view label_name(AreaLabel label);

struct AgreementReport {
    double dsc = 0.0;
    double ssim = 0.0;
    AreaLabel label = AreaLabel::optimal;
    double area_ratio = 1.0;
};

struct BlandAltmanPoint {
    double mean = 0.0;
    double diff = 0.0;
};

struct SeriesAgreement {
    double pearson_r = 0.0;
    double p_value = 1.0;
    double bias = 0.0;
    double loa_low = 0.0;
    double loa_high = 0.0;
    std::vector<BlandAltmanPoint> points;
};

void to_json(nlohmann::json& j, const AgreementReport& r);
void to_json(nlohmann::json& j, const SeriesAgreement& s);

/// 2|A n B| / (|A| + |B|). Two empty masks agree perfectly: 1.0.
double dice(const BinaryMask& a, const BinaryMask& b);

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03, L = 255 and
/// symmetric padding. Rasters smaller than the window use one global window.
double ssim(const GrayImage& a, const GrayImage& b);
/// Masks are lifted to {0, 255} first.
double ssim(const BinaryMask& a, const BinaryMask& b);

/// area(auto) / area(truth) against 1 +- tolerance.
AreaLabel classify(const BinaryMask& automatic, const BinaryMask& truth, double tolerance = 0.10);
double area_ratio(const BinaryMask& automatic, const BinaryMask& truth);

AgreementReport agreement(const BinaryMask& automatic, const BinaryMask& truth,
                          double tolerance = 0.10);

struct Correlation {
    double r = 0.0;
    double p_value = 1.0;
};

/// Sample Pearson r with a two-sided p from Student's t on n - 2 degrees of freedom.
Correlation pearson(std::span<const double> x, std::span<const double> y);

/// Differences x - y; limits are bias +- 1.96 sample SD.
SeriesAgreement bland_altman(std::span<const double> x, std::span<const double> y);

/// Pearson and Bland-Altman together.
SeriesAgreement compare_series(std::span<const double> x, std::span<const double> y);

} // namespace fazseg
