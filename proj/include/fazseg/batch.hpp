#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fazseg/metrics.hpp"
#include "fazseg/pipeline.hpp"
#include "fazseg/validation.hpp"

namespace fazseg {

enum class Layer { unspecified, superficial, deep };
std::string_view layer_name(Layer layer);
Layer parse_layer(std::string_view text);

struct RunConfig {
    std::filesystem::path input_dir;
    std::filesystem::path output_csv;
    PipelineParams params;
    std::optional<std::filesystem::path> truth_dir;
    Layer layer = Layer::unspecified;
    double extent_mm = 6.0;
    int jobs = 1;
};

namespace exit_code {
inline constexpr int success = 0;
inline constexpr int partial = 1;
inline constexpr int fatal = 2;
} // namespace exit_code

/// One image carried through pipeline and measurement.
struct ProcessedImage {
    std::string filename;
    GrayImage image;
    PipelineParams params;
    PipelineTrace trace;
    FazMeasurements measurements;
};

/// Images in `dir` (.png/.pgm, excluding *_mask.png), sorted by filename.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

/// `<stem>.params.json` next to the image, merged over `base` when present.
PipelineParams params_for(const std::filesystem::path& image_path, const PipelineParams& base);

/// Ground truth for `image_path` is `<truth_dir>/<stem>_mask.png`.
std::filesystem::path truth_path_for(const std::filesystem::path& image_path,
                                     const std::filesystem::path& truth_dir);

ProcessedImage process_image(const std::filesystem::path& path, const PipelineParams& base,
                             double extent_mm);

struct BatchResult {
    int exit_status = exit_code::success;
    std::size_t processed = 0;
    std::size_t failed = 0;
    std::size_t validated = 0;
    std::vector<std::string> warnings;
    std::filesystem::path validation_csv;
    std::filesystem::path bland_altman_csv;
    std::filesystem::path validation_json;
};

/// Writes the measurement CSV and, with a truth directory, the validation CSV, the
/// Bland-Altman point CSV and a JSON report beside it. Rows follow input order for any
/// number of jobs.
BatchResult run_batch(const RunConfig& config, std::ostream& log);

} // namespace fazseg
