#include "fazseg/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "fazseg/morphology.hpp"

namespace fazseg {

std::vector<std::string> PipelineParams::violations() const
{
    std::vector<std::string> out;
    if (crop_x < 0)
        out.push_back("crop_x must be >= 0");
    if (crop_y < 0)
        out.push_back("crop_y must be >= 0");
    if (!std::isfinite(fudge) || fudge <= 0.0)
        out.push_back("fudge must be a finite value > 0");
    if (dilation_len < 1)
        out.push_back("dilation_len must be >= 1");
    if (erosion_radius < 1)
        out.push_back("erosion_radius must be >= 1");
    if (description_band < 0)
        out.push_back("description_band must be >= 0");
    if (min_component_px < 1)
        out.push_back("min_component_px must be >= 1");
    return out;
}

std::vector<std::string> PipelineParams::violations(int image_width, int image_height) const
{
    auto out = violations();
    if (description_band >= image_height) {
        out.push_back("description_band must be smaller than the image height");
        return out;
    }
    const int w = image_width - crop_x - crop_y;
    const int h = image_height - description_band - crop_x - crop_y;
    if (w < kMinRoiSide || h < kMinRoiSide)
        out.push_back("crop_x + crop_y leaves a " + std::to_string(w) + "x" + std::to_string(h) +
                      " ROI, need at least " + std::to_string(kMinRoiSide) + "x" +
                      std::to_string(kMinRoiSide));
    return out;
}

void PipelineParams::validate(int image_width, int image_height) const
{
    const auto v = violations(image_width, image_height);
    if (v.empty())
        return;
    std::string msg = "invalid pipeline parameters:";
    for (const auto& s : v)
        msg += " " + s + ";";
    throw PreconditionError(msg);
}

void to_json(nlohmann::json& j, const PipelineParams& p)
{
    j = nlohmann::json{{"crop_x", p.crop_x},
                       {"crop_y", p.crop_y},
                       {"fudge", p.fudge},
                       {"dilation_len", p.dilation_len},
                       {"erosion_radius", p.erosion_radius},
                       {"description_band", p.description_band},
                       {"min_component_px", p.min_component_px}};
}

void merge_params(PipelineParams& p, const nlohmann::json& j)
{
    if (!j.is_object())
        throw PreconditionError("parameters must be a JSON object");
    auto read_int = [&](const std::string& key, const nlohmann::json& v) {
        if (!v.is_number_integer())
            throw PreconditionError("parameter '" + key + "' must be an integer");
        return v.get<int>();
    };
    for (const auto& [key, value] : j.items()) {
        if (key == "fudge") {
            if (!value.is_number())
                throw PreconditionError("parameter 'fudge' must be a number");
            p.fudge = value.get<double>();
        } else if (key == "crop_x") {
            p.crop_x = read_int(key, value);
        } else if (key == "crop_y") {
            p.crop_y = read_int(key, value);
        } else if (key == "dilation_len") {
            p.dilation_len = read_int(key, value);
        } else if (key == "erosion_radius") {
            p.erosion_radius = read_int(key, value);
        } else if (key == "description_band") {
            p.description_band = read_int(key, value);
        } else if (key == "min_component_px") {
            p.min_component_px = read_int(key, value);
        } else {
            throw PreconditionError("unknown parameter '" + key + "'");
        }
    }
}

void from_json(const nlohmann::json& j, PipelineParams& p)
{
    p = PipelineParams{};
    merge_params(p, j);
}

std::string_view stage_name(Stage s)
{
    switch (s) {
    case Stage::description: return "description";
    case Stage::crop: return "crop";
    case Stage::edges: return "edges";
    case Stage::close: return "close";
    case Stage::segment: return "segment";
    case Stage::measure: return "measure";
    }
    return "unknown";
}

StageError::StageError(Stage stage, const std::string& message)
    : Error(std::string(stage_name(stage)) + ": " + message), stage_(stage)
{
}

GrayImage strip_description(const GrayImage& img, const PipelineParams& params)
{
    if (params.description_band < 0 || params.description_band >= img.height())
        throw PreconditionError("description band of " + std::to_string(params.description_band) +
                                " rows does not fit an image of height " +
                                std::to_string(img.height()));
    if (params.description_band == 0)
        return img;
    return crop(img, 0, 0, 0, params.description_band);
}

CroppedRoi crop_roi(const GrayImage& img, const PipelineParams& params)
{
    const int w = img.width() - params.crop_x - params.crop_y;
    const int h = img.height() - params.crop_x - params.crop_y;
    if (params.crop_x < 0 || params.crop_y < 0 || w < kMinRoiSide || h < kMinRoiSide)
        throw PreconditionError("ROI crop leaves " + std::to_string(w) + "x" + std::to_string(h) +
                                " pixels, need at least 64x64");
    RoiOffset offset{params.crop_y, params.crop_x};
    return {crop(img, params.crop_y, params.crop_x, params.crop_x, params.crop_y), offset};
}

RealRaster prewitt_magnitude(const GrayImage& img)
{
    const int w = img.width();
    const int h = img.height();
    RealRaster mag(img.geometry(), 0.0);
    auto px = [&](int x, int y) -> int {
        return img(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int gx = 0, gy = 0;
            for (int k = -1; k <= 1; ++k) {
                gx += px(x + 1, y + k) - px(x - 1, y + k);
                gy += px(x + k, y + 1) - px(x + k, y - 1);
            }
            mag(x, y) = std::sqrt(double(gx) * gx + double(gy) * gy);
        }
    }
    return mag;
}

EdgeMap prewitt_edges(const GrayImage& img, double fudge)
{
    if (!(fudge > 0.0))
        throw PreconditionError("fudge must be > 0");
    const RealRaster mag = prewitt_magnitude(img);
    double sum = 0.0;
    for (double m : mag.data())
        sum += m;
    EdgeMap out{BinaryMask(img.geometry()), false, 0.0};
    out.base_threshold = 4.0 * sum / static_cast<double>(mag.size());
    if (out.base_threshold == 0.0) {
        out.no_gradient = true;
        return out;
    }
    const double threshold = fudge * out.base_threshold;
    auto src = mag.data();
    auto dst = out.edges.data();
    for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = src[i] >= threshold ? 1 : 0;
    return out;
}

BinaryMask close_region(const BinaryMask& edges, const PipelineParams& params)
{
    BinaryMask dilated(edges.geometry());
    for (int angle : {0, 45, 90})
        dilated = mask_union(dilated,
                             dilate(edges, StructuringElement::line(params.dilation_len, angle)));
    return erode(dilated, StructuringElement::disk(params.erosion_radius));
}

BinaryMask extract_faz(const BinaryMask& closed, const PipelineParams& params)
{
    const auto regions = connected_components(complement(closed), Connectivity::four);
    const double cx = closed.width() / 2.0;
    const double cy = closed.height() / 2.0;
    const Component* best = nullptr;
    double best_dist = 0.0;
    for (const auto& c : regions) {
        if (c.touches_border || c.area_px < static_cast<std::size_t>(params.min_component_px))
            continue;
        const double d = std::hypot(c.centroid.x - cx, c.centroid.y - cy);
        if (best == nullptr || c.area_px > best->area_px ||
            (c.area_px == best->area_px && d < best_dist)) {
            best = &c;
            best_dist = d;
        }
    }
    if (best == nullptr)
        throw StageError(Stage::segment,
                         "no enclosed FAZ found; lower fudge or lengthen the dilation");
    BinaryMask faz(closed.geometry());
    for (const auto& p : best->pixels)
        faz.set(p.x, p.y);
    return fill_holes(faz);
}

void finish_trace(PipelineTrace& trace, const Geometry& original, const PipelineParams& params)
{
    const BinaryMask faz = extract_faz(trace.closed, params);
    trace.chosen_component_area_px = faz.count();
    trace.faz_filled = embed(faz, original, trace.roi_offset.left, trace.roi_offset.top);
    trace.faz_outline = inner_boundary(trace.faz_filled);
}

PipelineTrace run_pipeline(const GrayImage& img, const PipelineParams& params)
{
    if (auto v = params.violations(); !v.empty())
        throw PreconditionError("invalid pipeline parameters: " + v.front());

    PipelineTrace trace;
    GrayImage stripped;
    try {
        stripped = strip_description(img, params);
    } catch (const PreconditionError& e) {
        throw StageError(Stage::description, e.what());
    }
    try {
        auto roi = crop_roi(stripped, params);
        trace.cropped = std::move(roi.image);
        trace.roi_offset = roi.offset;
    } catch (const PreconditionError& e) {
        throw StageError(Stage::crop, e.what());
    }
    auto edges = prewitt_edges(trace.cropped, params.fudge);
    if (edges.no_gradient)
        throw StageError(Stage::edges, "no gradient in the cropped region");
    trace.edges = std::move(edges.edges);
    trace.closed = close_region(trace.edges, params);
    finish_trace(trace, img.geometry(), params);
    return trace;
}

} // namespace fazseg
