#include "fazseg/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "fazseg/geometry.hpp"

namespace fazseg {

MeasurementError::MeasurementError(std::string field, const std::string& message)
    : Error(field + ": " + message), field_(std::move(field))
{
}

namespace {

void require_non_empty(const BinaryMask& mask, const char* field)
{
    if (mask.empty())
        throw MeasurementError(field, "mask is empty");
}

double mm(const BinaryMask& mask)
{
    return mask.scale().mm_per_px;
}

// Clockwise in image coordinates (y down): E, SE, S, SW, W, NW, N, NE.
constexpr std::array<Offset, 8> kDirs = {
    Offset{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};

int direction_of(int dx, int dy)
{
    for (int k = 0; k < 8; ++k)
        if (kDirs[k].dx == dx && kDirs[k].dy == dy)
            return k;
    return -1;
}

// Leftmost and rightmost set pixel of every row; enough to span the region's hull.
std::vector<std::pair<int, int>> row_extents(const BinaryMask& mask, std::vector<int>& rows)
{
    std::vector<std::pair<int, int>> ext;
    rows.clear();
    for (int y = 0; y < mask.height(); ++y) {
        int lo = -1, hi = -1;
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.test(x, y)) {
                if (lo < 0)
                    lo = x;
                hi = x;
            }
        }
        if (lo >= 0) {
            ext.emplace_back(lo, hi);
            rows.push_back(y);
        }
    }
    return ext;
}

std::vector<PointD> pixel_centre_hull(const BinaryMask& mask)
{
    std::vector<int> rows;
    const auto ext = row_extents(mask, rows);
    std::vector<PointD> pts;
    for (std::size_t i = 0; i < ext.size(); ++i) {
        const double y = rows[i] + 0.5;
        pts.push_back({ext[i].first + 0.5, y});
        pts.push_back({ext[i].second + 0.5, y});
    }
    return geometry::convex_hull(std::move(pts));
}

std::size_t crack_perimeter(const BinaryMask& mask)
{
    std::size_t edges = 0;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.test(x, y))
                for (int k = 0; k < 8; k += 2)
                    edges += mask.test_or_background(x + kDirs[k].dx, y + kDirs[k].dy) ? 0 : 1;
    return edges;
}

double chain_length_px(const std::vector<PointI>& chain)
{
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
        const bool diagonal = chain[i].x != chain[i + 1].x && chain[i].y != chain[i + 1].y;
        len += diagonal ? std::numbers::sqrt2 : 1.0;
    }
    return len;
}

void check_single_region(const BinaryMask& mask, const char* field)
{
    if (connected_components(mask, Connectivity::eight).size() != 1)
        throw MeasurementError(field, "mask must be a single 8-connected region");
}

} // namespace

void to_json(nlohmann::json& j, const FazMeasurements& m)
{
    j = nlohmann::json{{"area_mm2", m.area},
                       {"diameter_mm", m.diameter},
                       {"major_axis_mm", m.major_axis},
                       {"minor_axis_mm", m.minor_axis},
                       {"perimeter_mm", m.perimeter},
                       {"eccentricity", m.eccentricity},
                       {"fmin_mm", m.f_min},
                       {"fmax_mm", m.f_max},
                       {"inner_circle_radius_mm", m.inner_circle_radius},
                       {"circumcircle_radius_mm", m.circumcircle_radius},
                       {"orientation_deg", m.orientation},
                       {"tortuosity", m.tortuosity},
                       {"vad", m.vad},
                       {"vdi_mm", m.vdi},
                       {"circularity", m.circularity},
                       {"warnings", m.warnings}};
}

double region_area(const BinaryMask& mask)
{
    require_non_empty(mask, "area");
    return static_cast<double>(mask.count()) * mm(mask) * mm(mask);
}

double equivalent_diameter(double area_mm2)
{
    if (area_mm2 < 0.0)
        throw MeasurementError("diameter", "negative area");
    return 2.0 * std::sqrt(area_mm2 / std::numbers::pi);
}

std::vector<PointI> trace_boundary(const BinaryMask& mask)
{
    std::vector<PointI> chain;
    PointI start{-1, -1};
    for (int y = 0; y < mask.height() && start.x < 0; ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.test(x, y)) {
                start = {x, y};
                break;
            }
    if (start.x < 0)
        return chain;

    // Moore-neighbour tracing; `back` is the direction from the current pixel to a known
    // background neighbour. Stops when the start pixel is about to repeat its first move.
    PointI p = start;
    int back = 4; // west of the first pixel in raster order is background
    int first_move = -1;
    chain.push_back(p);
    const std::size_t limit = 4 * mask.count() + 8;
    while (chain.size() <= limit) {
        int found = -1;
        for (int i = 1; i <= 8; ++i) {
            const int k = (back + i) % 8;
            if (mask.test_or_background(p.x + kDirs[k].dx, p.y + kDirs[k].dy)) {
                found = k;
                break;
            }
        }
        if (found < 0)
            break;
        if (p == start) {
            if (first_move < 0)
                first_move = found;
            else if (found == first_move)
                break;
        }
        const PointI next{p.x + kDirs[found].dx, p.y + kDirs[found].dy};
        const int prev = (found + 7) % 8;
        back = direction_of(p.x + kDirs[prev].dx - next.x, p.y + kDirs[prev].dy - next.y);
        p = next;
        chain.push_back(p);
    }
    return chain;
}

double boundary_perimeter(const BinaryMask& mask)
{
    require_non_empty(mask, "perimeter");
    if (mask.count() < 4)
        return static_cast<double>(crack_perimeter(mask)) * mm(mask);
    check_single_region(mask, "perimeter");
    return chain_length_px(trace_boundary(mask)) * mm(mask);
}

EllipseFit ellipse_fit(const BinaryMask& mask)
{
    if (mask.count() < 2)
        throw MeasurementError("ellipse", "ellipse fit needs at least 2 pixels");
    double n = 0.0, sx = 0.0, sy = 0.0;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.test(x, y)) {
                n += 1.0;
                sx += x + 0.5;
                sy += y + 0.5;
            }
    const double cx = sx / n;
    const double cy = sy / n;
    double m20 = 0.0, m02 = 0.0, m11 = 0.0;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.test(x, y)) {
                const double dx = x + 0.5 - cx;
                const double dy = -(y + 0.5 - cy); // y axis up
                m20 += dx * dx;
                m02 += dy * dy;
                m11 += dx * dy;
            }
    // A unit pixel adds variance 1/12 along each axis.
    const double a = m20 / n + 1.0 / 12.0;
    const double c = m02 / n + 1.0 / 12.0;
    const double b = m11 / n + 0.0;
    const double mid = (a + c) / 2.0;
    const double rad = std::hypot((a - c) / 2.0, b);
    const double l1 = mid + rad;
    const double l2 = std::max(mid - rad, 1.0 / 12.0);

    EllipseFit fit;
    fit.major = 4.0 * std::sqrt(l1) * mm(mask);
    fit.minor = 4.0 * std::sqrt(l2) * mm(mask);
    fit.eccentricity = std::sqrt(std::max(0.0, 1.0 - l2 / l1));
    fit.orientation = 0.5 * std::atan2(2.0 * b, a - c) * 180.0 / std::numbers::pi;
    if (fit.orientation <= -90.0)
        fit.orientation += 180.0;
    return fit;
}

std::vector<PointD> pixel_corner_hull(const BinaryMask& mask)
{
    std::vector<int> rows;
    const auto ext = row_extents(mask, rows);
    std::vector<PointD> pts;
    for (std::size_t i = 0; i < ext.size(); ++i) {
        const double y = rows[i];
        for (double yy : {y, y + 1.0}) {
            pts.push_back({double(ext[i].first), yy});
            pts.push_back({ext[i].second + 1.0, yy});
        }
    }
    return geometry::convex_hull(std::move(pts));
}

FeretDiameters feret_diameters(const BinaryMask& mask)
{
    require_non_empty(mask, "feret");
    const auto hull = pixel_corner_hull(mask);
    return {geometry::min_width(hull) * mm(mask), geometry::diameter(hull) * mm(mask)};
}

double inscribed_circle_radius(const BinaryMask& mask)
{
    require_non_empty(mask, "inner_circle_radius");
    if (mask.count() == mask.size())
        throw MeasurementError("inner_circle_radius", "mask has no background");
    const RealRaster dt = distance_transform(mask);
    return *std::max_element(dt.data().begin(), dt.data().end()) * mm(mask);
}

double circumscribed_circle_radius(const BinaryMask& mask)
{
    require_non_empty(mask, "circumcircle_radius");
    const auto hull = pixel_corner_hull(mask);
    return geometry::min_enclosing_circle(hull).radius * mm(mask);
}

double tortuosity(const BinaryMask& mask)
{
    require_non_empty(mask, "tortuosity");
    if (mask.count() < 4)
        return 1.0;
    check_single_region(mask, "tortuosity");
    const double chain = chain_length_px(trace_boundary(mask));
    const auto hull = pixel_centre_hull(mask);
    const double hull_len = geometry::chain_metric_perimeter(hull);
    if (hull_len <= 0.0)
        return 1.0;
    return chain / hull_len;
}

double circularity(double area_mm2, double perimeter_mm)
{
    if (!(perimeter_mm > 0.0))
        throw MeasurementError("circularity", "perimeter must be positive");
    return 4.0 * std::numbers::pi * area_mm2 / (perimeter_mm * perimeter_mm);
}

int otsu_threshold(std::span<const std::size_t, 256> hist)
{
    double total = 0.0, sum_all = 0.0;
    for (int v = 0; v < 256; ++v) {
        total += static_cast<double>(hist[v]);
        sum_all += static_cast<double>(v) * static_cast<double>(hist[v]);
    }
    double w0 = 0.0, sum0 = 0.0, best = 0.0;
    int best_t = 255;
    for (int t = 0; t < 255; ++t) {
        w0 += static_cast<double>(hist[t]);
        sum0 += static_cast<double>(t) * static_cast<double>(hist[t]);
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0)
            continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (between > best) {
            best = between;
            best_t = t;
        }
    }
    return best_t;
}

double skeleton_length_px(const BinaryMask& s)
{
    double len = 0.0;
    for (int y = 0; y < s.height(); ++y)
        for (int x = 0; x < s.width(); ++x) {
            if (!s.test(x, y))
                continue;
            const bool right = s.test_or_background(x + 1, y);
            const bool down = s.test_or_background(x, y + 1);
            const bool left = s.test_or_background(x - 1, y);
            len += right ? 1.0 : 0.0;
            len += down ? 1.0 : 0.0;
            if (s.test_or_background(x + 1, y + 1) && !right && !down)
                len += std::numbers::sqrt2;
            if (s.test_or_background(x - 1, y + 1) && !left && !down)
                len += std::numbers::sqrt2;
        }
    return len;
}

VesselMetrics vad_vdi(const GrayImage& image, const BinaryMask& faz_mask)
{
    if (image.width() != faz_mask.width() || image.height() != faz_mask.height())
        throw GeometryMismatch("vad: image and FAZ mask sizes differ");
    std::array<std::size_t, 256> hist{};
    std::size_t region = 0;
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x)
            if (!faz_mask.test(x, y)) {
                ++hist[image(x, y)];
                ++region;
            }
    if (region == 0)
        throw MeasurementError("vad", "empty analysis region");
    const int t = otsu_threshold(hist);

    VesselMetrics out;
    out.vessels = BinaryMask(faz_mask.geometry());
    std::size_t vessel_px = 0;
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x)
            if (!faz_mask.test(x, y) && image(x, y) > t) {
                out.vessels.set(x, y);
                ++vessel_px;
            }
    out.vad = static_cast<double>(vessel_px) / static_cast<double>(region);
    const double skel = skeleton_length_px(skeletonize(out.vessels));
    if (skel > 0.0) {
        const double scale = faz_mask.scale().mm_per_px;
        out.vdi = (static_cast<double>(vessel_px) * scale * scale) / (skel * scale);
        out.vdi_defined = true;
    }
    return out;
}

FazMeasurements measure(const BinaryMask& mask, const GrayImage& image)
{
    require_non_empty(mask, "area");
    FazMeasurements m;
    m.area = region_area(mask);
    m.diameter = equivalent_diameter(m.area);
    const EllipseFit fit = ellipse_fit(mask);
    m.major_axis = fit.major;
    m.minor_axis = fit.minor;
    m.orientation = fit.orientation;
    m.eccentricity = fit.eccentricity;
    m.perimeter = boundary_perimeter(mask);
    const FeretDiameters feret = feret_diameters(mask);
    m.f_min = feret.f_min;
    m.f_max = feret.f_max;
    m.inner_circle_radius = inscribed_circle_radius(mask);
    m.circumcircle_radius = circumscribed_circle_radius(mask);
    m.tortuosity = tortuosity(mask);
    const VesselMetrics vessels = vad_vdi(image, mask);
    m.vad = vessels.vad;
    m.vdi = vessels.vdi;
    if (!vessels.vdi_defined)
        m.warnings.push_back("vdi: empty vessel skeleton, reported as 0");
    m.circularity = circularity(m.area, m.perimeter);
    return m;
}

} // namespace fazseg
