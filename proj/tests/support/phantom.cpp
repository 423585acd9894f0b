#include "phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fazseg/image_io.hpp"
#include "fazseg/morphology.hpp"
#include "fazseg/validation.hpp"

namespace fazseg::testing {

namespace {

std::uint64_t splitmix(std::uint64_t& x)
{
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k)
{
    return (x << k) | (x >> (64 - k));
}

} // namespace

Rng::Rng(std::uint64_t seed)
{
    for (auto& s : state_)
        s = splitmix(seed);
}

// xoshiro256**
std::uint64_t Rng::next()
{
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform()
{
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi)
{
    return lo + (hi - lo) * uniform();
}

double Rng::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u = 0.0;
    while (u <= 0.0)
        u = uniform();
    const double v = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    spare_ = r * std::sin(2.0 * std::numbers::pi * v);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * v);
}

int Rng::integer(int lo, int hi)
{
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
}

namespace {

struct Blob {
    double cx, cy, r0;
    double amp[3];
    double phase[3];

    double radius(double theta) const
    {
        double r = 1.0;
        for (int k = 0; k < 3; ++k)
            r += amp[k] * std::cos((k + 2) * theta + phase[k]);
        return r0 * r;
    }
    bool inside(double x, double y) const
    {
        const double dx = x - cx, dy = y - cy;
        return std::hypot(dx, dy) <= radius(std::atan2(dy, dx));
    }
};

void stamp(std::vector<double>& canvas, const BinaryMask& truth, double x, double y,
           double radius, double value)
{
    const int w = truth.width(), h = truth.height();
    const int x0 = std::max(0, static_cast<int>(std::floor(x - radius)));
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(x + radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(y - radius)));
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(y + radius)));
    for (int py = y0; py <= y1; ++py)
        for (int px = x0; px <= x1; ++px) {
            if (truth.test(px, py))
                continue;
            if (std::hypot(px + 0.5 - x, py + 0.5 - y) <= radius) {
                double& c = canvas[static_cast<std::size_t>(py) * w + px];
                c = std::max(c, value);
            }
        }
}

} // namespace

Phantom make_phantom(std::uint64_t seed, const PhantomOptions& o)
{
    Rng rng(seed);
    const int n = o.side_px;
    const Geometry geom{n, n, PhysicalScale::from_scan(o.extent_mm, n)};

    Blob blob;
    blob.cx = n / 2.0 + rng.uniform(-8.0, 8.0);
    blob.cy = n / 2.0 + rng.uniform(-8.0, 8.0);
    blob.r0 = rng.uniform(o.min_radius_px, o.max_radius_px);
    for (int k = 0; k < 3; ++k) {
        blob.amp[k] = rng.uniform(0.0, 0.12 / (k + 1));
        blob.phase[k] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }

    BinaryMask truth(geom);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            if (blob.inside(x + 0.5, y + 0.5))
                truth.set(x, y);

    const double background = rng.uniform(35.0, 50.0);
    const double faz_level = rng.uniform(10.0, 20.0);
    std::vector<double> canvas(geom.pixel_count(), background);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            if (truth.test(x, y))
                canvas[static_cast<std::size_t>(y) * n + x] = faz_level;

    // Perifoveal capillary arcade hugging the avascular zone.
    {
        const double ring_radius = rng.uniform(1.2, 1.8);
        const int steps = 1440;
        double value = rng.uniform(160.0, 220.0);
        for (int i = 0; i < steps; ++i) {
            const double t = 2.0 * std::numbers::pi * i / steps;
            const double r = blob.radius(t) + ring_radius;
            value = std::clamp(value + rng.uniform(-3.0, 3.0), 140.0, 230.0);
            stamp(canvas, truth, blob.cx + r * std::cos(t), blob.cy + r * std::sin(t),
                  ring_radius, value);
        }
    }

    // Vessel texture: smooth random walks; larger trunks are brighter and wider.
    for (int v = 0; v < o.vessel_count; ++v) {
        double x, y;
        if (v % 3 == 0) {
            // Capillaries sprouting from the arcade.
            const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double r = blob.radius(t) + 2.0;
            x = blob.cx + r * std::cos(t);
            y = blob.cy + r * std::sin(t);
        } else {
            x = rng.uniform(0.0, n);
            y = rng.uniform(0.0, n);
        }
        double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
        if (v % 3 == 0)
            heading = std::atan2(y - blob.cy, x - blob.cx) + rng.uniform(-0.6, 0.6);
        const bool trunk = rng.uniform() < 0.15;
        const double radius = trunk ? rng.uniform(2.0, 3.0) : rng.uniform(0.9, 1.6);
        const double value = trunk ? rng.uniform(200.0, 240.0) : rng.uniform(130.0, 210.0);
        const int length = rng.integer(60, 220);
        for (int s = 0; s < length; ++s) {
            stamp(canvas, truth, x, y, radius, value);
            heading += 0.12 * rng.normal();
            x += std::cos(heading);
            y += std::sin(heading);
            if (x < -5 || y < -5 || x > n + 5 || y > n + 5)
                break;
        }
    }

    std::vector<std::uint8_t> pixels(canvas.size());
    for (std::size_t i = 0; i < canvas.size(); ++i)
        pixels[i] = static_cast<std::uint8_t>(
            std::clamp(std::lround(canvas[i] + o.noise_sigma * rng.normal()), 0L, 255L));
    return {GrayImage(geom, std::move(pixels)), std::move(truth)};
}

TunedRun tune_against_truth(const Phantom& phantom, const PipelineParams& base)
{
    // Same stage functions as run_pipeline, with shared stages computed once per grid row.
    const CroppedRoi roi = crop_roi(strip_description(phantom.image, base), base);
    const RealRaster mag = prewitt_magnitude(roi.image);
    double sum = 0.0;
    for (double m : mag.data())
        sum += m;
    const double t0 = 4.0 * sum / static_cast<double>(mag.size());
    if (t0 == 0.0)
        throw StageError(Stage::edges, "no gradient in the cropped region");

    TunedRun best;
    best.dsc = -1.0;
    for (double fudge : {0.3, 0.4, 0.5, 0.6, 0.8}) {
        BinaryMask edges(roi.image.geometry());
        auto src = mag.data();
        auto dst = edges.data();
        for (std::size_t i = 0; i < dst.size(); ++i)
            dst[i] = src[i] >= fudge * t0 ? 1 : 0;
        for (int dilation : {5, 7, 9}) {
            BinaryMask dilated(edges.geometry());
            for (int angle : {0, 45, 90})
                dilated = mask_union(dilated,
                                     dilate(edges, StructuringElement::line(dilation, angle)));
            for (int erosion : {2, 3}) {
                PipelineParams p = base;
                p.fudge = fudge;
                p.dilation_len = dilation;
                p.erosion_radius = erosion;
                PipelineTrace trace;
                trace.cropped = roi.image;
                trace.roi_offset = roi.offset;
                trace.edges = edges;
                trace.closed = erode(dilated, StructuringElement::disk(erosion));
                try {
                    finish_trace(trace, phantom.image.geometry(), p);
                } catch (const StageError&) {
                    continue;
                }
                const double d = dice(trace.faz_filled, phantom.truth);
                if (d > best.dsc)
                    best = {p, std::move(trace), d};
            }
        }
    }
    if (best.dsc < 0.0)
        throw StageError(Stage::segment, "no parameter combination segmented the phantom");
    return best;
}

void write_phantom_set(const std::filesystem::path& image_dir,
                       const std::filesystem::path& truth_dir, int count, std::uint64_t seed,
                       const std::string& prefix)
{
    std::filesystem::create_directories(image_dir);
    std::filesystem::create_directories(truth_dir);
    for (int i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "%03d", i);
        const Phantom p = make_phantom(seed + static_cast<std::uint64_t>(i));
        save_gray(image_dir / (prefix + name + ".png"), p.image);
        save_mask(truth_dir / (prefix + name + "_mask.png"), p.truth);
    }
}

} // namespace fazseg::testing
