#include "fazseg/validation.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>

namespace fazseg {

std::string_view label_name(AreaLabel label)
{
    switch (label) {
    case AreaLabel::under: return "under";
    case AreaLabel::optimal: return "optimal";
    case AreaLabel::over: return "over";
    }
    return "unknown";
}

void to_json(nlohmann::json& j, const AgreementReport& r)
{
    j = nlohmann::json{{"dsc", r.dsc},
                       {"ssim", r.ssim},
                       {"label", label_name(r.label)},
                       {"area_ratio", r.area_ratio}};
}

void to_json(nlohmann::json& j, const SeriesAgreement& s)
{
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : s.points)
        pts.push_back({{"mean", p.mean}, {"diff", p.diff}});
    j = nlohmann::json{{"pearson_r", s.pearson_r}, {"p_value", s.p_value}, {"bias", s.bias},
                       {"loa_low", s.loa_low},     {"loa_high", s.loa_high}, {"points", pts}};
}

double dice(const BinaryMask& a, const BinaryMask& b)
{
    if (a.geometry() != b.geometry())
        throw GeometryMismatch("dice: mask geometries differ");
    std::size_t na = 0, nb = 0, both = 0;
    auto da = a.data();
    auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) {
        na += da[i];
        nb += db[i];
        both += da[i] & db[i];
    }
    if (na + nb == 0)
        return 1.0;
    return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

std::vector<double> gaussian_kernel()
{
    std::vector<double> k(kWindow);
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - kWindow / 2;
        k[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
        sum += k[i];
    }
    for (auto& v : k)
        v /= sum;
    return k;
}

// Symmetric (edge-including) reflection: -1 -> 0, -2 -> 1, n -> n-1.
int reflect(int i, int n)
{
    while (i < 0 || i >= n) {
        if (i < 0)
            i = -i - 1;
        if (i >= n)
            i = 2 * n - i - 1;
    }
    return i;
}

std::vector<double> blur(const std::vector<double>& src, int w, int h,
                         const std::vector<double>& k)
{
    const int r = kWindow / 2;
    std::vector<double> tmp(src.size()), out(src.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i)
                acc += k[i + r] * src[static_cast<std::size_t>(y) * w + reflect(x + i, w)];
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i)
                acc += k[i + r] * tmp[static_cast<std::size_t>(reflect(y + i, h)) * w + x];
            out[static_cast<std::size_t>(y) * w + x] = acc;
        }
    return out;
}

double ssim_raw(std::span<const double> a, std::span<const double> b, int w, int h)
{
    constexpr double C1 = (0.01 * 255.0) * (0.01 * 255.0);
    constexpr double C2 = (0.03 * 255.0) * (0.03 * 255.0);
    auto index = [](double ma, double mb, double va, double vb, double cov) {
        return ((2.0 * ma * mb + C1) * (2.0 * cov + C2)) /
               ((ma * ma + mb * mb + C1) * (va + vb + C2));
    };

    const std::size_t n = a.size();
    if (w < kWindow || h < kWindow) {
        double ma = 0.0, mb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ma += a[i];
            mb += b[i];
        }
        ma /= n;
        mb /= n;
        double va = 0.0, vb = 0.0, cov = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            va += (a[i] - ma) * (a[i] - ma);
            vb += (b[i] - mb) * (b[i] - mb);
            cov += (a[i] - ma) * (b[i] - mb);
        }
        return index(ma, mb, va / n, vb / n, cov / n);
    }

    const auto k = gaussian_kernel();
    std::vector<double> va(a.begin(), a.end()), vb(b.begin(), b.end());
    std::vector<double> aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        aa[i] = va[i] * va[i];
        bb[i] = vb[i] * vb[i];
        ab[i] = va[i] * vb[i];
    }
    const auto mu_a = blur(va, w, h, k);
    const auto mu_b = blur(vb, w, h, k);
    const auto e_aa = blur(aa, w, h, k);
    const auto e_bb = blur(bb, w, h, k);
    const auto e_ab = blur(ab, w, h, k);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ma = mu_a[i], mb = mu_b[i];
        total += index(ma, mb, e_aa[i] - ma * ma, e_bb[i] - mb * mb, e_ab[i] - ma * mb);
    }
    return total / static_cast<double>(n);
}

} // namespace

double ssim(const GrayImage& a, const GrayImage& b)
{
    if (a.width() != b.width() || a.height() != b.height())
        throw GeometryMismatch("ssim: raster sizes differ");
    std::vector<double> va(a.data().begin(), a.data().end());
    std::vector<double> vb(b.data().begin(), b.data().end());
    return ssim_raw(va, vb, a.width(), a.height());
}

double ssim(const BinaryMask& a, const BinaryMask& b)
{
    if (a.width() != b.width() || a.height() != b.height())
        throw GeometryMismatch("ssim: raster sizes differ");
    std::vector<double> va(a.size()), vb(b.size());
    for (std::size_t i = 0; i < va.size(); ++i) {
        va[i] = a.data()[i] ? 255.0 : 0.0;
        vb[i] = b.data()[i] ? 255.0 : 0.0;
    }
    return ssim_raw(va, vb, a.width(), a.height());
}

double area_ratio(const BinaryMask& automatic, const BinaryMask& truth)
{
    if (automatic.width() != truth.width() || automatic.height() != truth.height())
        throw GeometryMismatch("classify: mask sizes differ");
    const std::size_t t = truth.count();
    if (t == 0)
        throw PreconditionError("classify: ground-truth mask is empty");
    return static_cast<double>(automatic.count()) / static_cast<double>(t);
}

AreaLabel classify(const BinaryMask& automatic, const BinaryMask& truth, double tolerance)
{
    const double r = area_ratio(automatic, truth);
    if (r < 1.0 - tolerance)
        return AreaLabel::under;
    if (r > 1.0 + tolerance)
        return AreaLabel::over;
    return AreaLabel::optimal;
}

AgreementReport agreement(const BinaryMask& automatic, const BinaryMask& truth, double tolerance)
{
    AgreementReport r;
    r.dsc = dice(automatic, truth);
    r.ssim = ssim(automatic, truth);
    r.area_ratio = area_ratio(automatic, truth);
    r.label = classify(automatic, truth, tolerance);
    return r;
}

namespace {

double mean(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

} // namespace

Correlation pearson(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw PreconditionError("pearson: series lengths differ");
    if (x.size() < 3)
        throw PreconditionError("pearson: need at least 3 pairs");
    const double mx = mean(x), my = mean(y);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        throw PreconditionError("pearson: undefined correlation for a constant series");
    Correlation c;
    c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double df = static_cast<double>(x.size()) - 2.0;
    const double one_minus = 1.0 - c.r * c.r;
    if (one_minus <= 0.0) {
        c.p_value = 0.0;
    } else {
        const double t = c.r * std::sqrt(df / one_minus);
        boost::math::students_t dist(df);
        c.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))),
                               0.0, 1.0);
    }
    return c;
}

SeriesAgreement bland_altman(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw PreconditionError("bland_altman: series lengths differ");
    if (x.size() < 2)
        throw PreconditionError("bland_altman: need at least 2 pairs");
    SeriesAgreement s;
    std::vector<double> diffs(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        diffs[i] = x[i] - y[i];
        s.points.push_back({(x[i] + y[i]) / 2.0, diffs[i]});
    }
    s.bias = mean(diffs);
    double ss = 0.0;
    for (double d : diffs)
        ss += (d - s.bias) * (d - s.bias);
    const double sd = std::sqrt(ss / static_cast<double>(diffs.size() - 1));
    s.loa_low = s.bias - 1.96 * sd;
    s.loa_high = s.bias + 1.96 * sd;
    return s;
}

SeriesAgreement compare_series(std::span<const double> x, std::span<const double> y)
{
    SeriesAgreement s = bland_altman(x, y);
    const Correlation c = pearson(x, y);
    s.pearson_r = c.r;
    s.p_value = c.p_value;
    return s;
}

} // namespace fazseg
