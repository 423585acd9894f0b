#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fazseg/image.hpp"
#include "fazseg/pipeline.hpp"

namespace fazseg::testing {

/// Synthetic en-face OCTA scan: a dark irregular avascular blob ringed by a capillary
/// arcade, inside random branching vessel texture, with additive noise.
struct Phantom {
    GrayImage image;
    BinaryMask truth;
};

struct PhantomOptions {
    int side_px = 420;
    double extent_mm = 6.0;
    double min_radius_px = 32.0;
    double max_radius_px = 44.0;
    int vessel_count = 150;
    double noise_sigma = 4.0;
};

Phantom make_phantom(std::uint64_t seed, const PhantomOptions& options = {});

struct TunedRun {
    PipelineParams params;
    PipelineTrace trace;
    double dsc = 0.0;
};

/// Grid search over fudge, dilation and erosion for the best DSC against the phantom
/// truth; the role a human plays with the tuning sliders.
TunedRun tune_against_truth(const Phantom& phantom, const PipelineParams& base = {});

/// Writes <prefix>NNN.png images and <prefix>NNN_mask.png truths into the two directories.
void write_phantom_set(const std::filesystem::path& image_dir,
                       const std::filesystem::path& truth_dir, int count, std::uint64_t seed,
                       const std::string& prefix = "phantom_");

/// Small deterministic generator shared by tests (mt19937_64 output is fully specified).
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    double uniform();
    double uniform(double lo, double hi);
    double normal();
    int integer(int lo, int hi);

private:
    std::uint64_t state_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
    std::uint64_t next();
};

} // namespace fazseg::testing
