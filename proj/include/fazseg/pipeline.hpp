#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fazseg/image.hpp"

namespace fazseg {

/// The five tunables (crop_x, crop_y, fudge, dilation_len, erosion_radius) plus two
/// fixed constants with defaults.
struct PipelineParams {
    int crop_x = 60;
    int crop_y = 60;
    double fudge = 0.5;
    int dilation_len = 7;
    int erosion_radius = 3;
    int description_band = 0;
    int min_component_px = 50;

    /// Range violations that do not depend on the image size. Empty when valid.
    std::vector<std::string> violations() const;
    /// Adds the ROI size check against an image of the given size.
    std::vector<std::string> violations(int image_width, int image_height) const;
    void validate(int image_width, int image_height) const;

    friend bool operator==(const PipelineParams&, const PipelineParams&) = default;
};

inline constexpr int kMinRoiSide = 64;

void to_json(nlohmann::json& j, const PipelineParams& p);
/// Keys absent from `j` keep their current value, so this also applies partial updates.
/// Unknown keys and wrongly typed values throw PreconditionError.
void merge_params(PipelineParams& p, const nlohmann::json& j);
void from_json(const nlohmann::json& j, PipelineParams& p);

enum class Stage { description, crop, edges, close, segment, measure };
std::string_view stage_name(Stage s);

/// Failure of one pipeline stage; the stage travels with the error.
class StageError : public Error {
public:
    StageError(Stage stage, const std::string& message);
    Stage stage() const { return stage_; }

private:
    Stage stage_;
};

struct RoiOffset {
    int left = 0;
    int top = 0;
    friend bool operator==(const RoiOffset&, const RoiOffset&) = default;
};

struct CroppedRoi {
    GrayImage image;
    RoiOffset offset;
};

struct EdgeMap {
    BinaryMask edges;
    /// True when the image has zero gradient everywhere; `edges` is then empty.
    bool no_gradient = false;
    double base_threshold = 0.0;
};

struct PipelineTrace {
    GrayImage cropped;
    BinaryMask edges;
    BinaryMask closed;
    /// Original image frame.
    BinaryMask faz_filled;
    /// Original image frame.
    BinaryMask faz_outline;
    std::size_t chosen_component_area_px = 0;
    RoiOffset roi_offset;

    friend bool operator==(const PipelineTrace&, const PipelineTrace&) = default;
};

/// Removes `description_band` rows from the bottom.
GrayImage strip_description(const GrayImage& img, const PipelineParams& params);

/// Removes crop_x from the top and right edges and crop_y from the bottom and left edges.
CroppedRoi crop_roi(const GrayImage& img, const PipelineParams& params);

/// Prewitt gradient magnitude with replicate padding.
RealRaster prewitt_magnitude(const GrayImage& img);

/// Edge pixels have magnitude >= fudge * 4 * mean magnitude.
EdgeMap prewitt_edges(const GrayImage& img, double fudge);

/// Union of line dilations at 0, 45 and 90 degrees, then erosion by a disk.
BinaryMask close_region(const BinaryMask& edges, const PipelineParams& params);

/// Largest enclosed, non-border background region of `closed` with at least
/// min_component_px pixels; ties go to the centroid nearest the raster centre.
BinaryMask extract_faz(const BinaryMask& closed, const PipelineParams& params);

/// Composes the chain after `closed` is known: FAZ extraction, frame mapping, outline.
void finish_trace(PipelineTrace& trace, const Geometry& original, const PipelineParams& params);

PipelineTrace run_pipeline(const GrayImage& img, const PipelineParams& params);

} // namespace fazseg
