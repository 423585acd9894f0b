#include "fazseg/batch.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <thread>

#include "fazseg/image_io.hpp"
#include "fazseg/report.hpp"

namespace fazseg {

namespace fs = std::filesystem;

std::string_view layer_name(Layer layer)
{
    switch (layer) {
    case Layer::superficial: return "superficial";
    case Layer::deep: return "deep";
    case Layer::unspecified: return "unspecified";
    }
    return "unspecified";
}

Layer parse_layer(std::string_view text)
{
    if (text == "superficial")
        return Layer::superficial;
    if (text == "deep")
        return Layer::deep;
    if (text == "unspecified" || text.empty())
        return Layer::unspecified;
    throw PreconditionError("unknown layer '" + std::string(text) + "'");
}

namespace {

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool ends_with(const std::string& s, std::string_view suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

fs::path sibling(const fs::path& csv, const std::string& suffix)
{
    return csv.parent_path() / (csv.stem().string() + suffix);
}

struct ImageOutcome {
    std::optional<ProcessedImage> processed;
    std::optional<AgreementReport> agreement;
    std::optional<FazMeasurements> truth_measurements;
    std::vector<std::string> messages;
    bool failed = false;
};

ImageOutcome run_one(const fs::path& path, const RunConfig& config)
{
    ImageOutcome out;
    const std::string name = path.filename().string();
    try {
        out.processed = process_image(path, config.params, config.extent_mm);
    } catch (const StageError& e) {
        out.failed = true;
        out.messages.push_back(name + ": stage " + std::string(stage_name(e.stage())) + " failed: " +
                               e.what());
        return out;
    } catch (const std::exception& e) {
        out.failed = true;
        out.messages.push_back(name + ": " + e.what());
        return out;
    }
    if (!config.truth_dir)
        return out;
    const fs::path truth = truth_path_for(path, *config.truth_dir);
    if (!fs::exists(truth)) {
        out.messages.push_back(name + ": no ground truth " + truth.filename().string() +
                               ", validation skipped");
        return out;
    }
    try {
        const auto& img = out.processed->image;
        const BinaryMask truth_mask = load_mask(truth, img.scale());
        if (truth_mask.width() != img.width() || truth_mask.height() != img.height())
            throw GeometryMismatch("ground truth size differs from the image");
        out.agreement = agreement(out.processed->trace.faz_filled, truth_mask);
        out.truth_measurements = measure(truth_mask, img);
    } catch (const std::exception& e) {
        out.agreement.reset();
        out.messages.push_back(name + ": validation skipped: " + e.what());
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text)
{
    write_file(path, std::span<const std::uint8_t>(
                         reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

} // namespace

std::vector<fs::path> list_images(const fs::path& dir)
{
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file())
            continue;
        const std::string name = lower(entry.path().filename().string());
        const std::string ext = lower(entry.path().extension().string());
        if ((ext == ".png" || ext == ".pgm") && !ends_with(name, "_mask.png"))
            out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
    return out;
}

PipelineParams params_for(const fs::path& image_path, const PipelineParams& base)
{
    const fs::path sidecar = image_path.parent_path() / (image_path.stem().string() + ".params.json");
    if (!fs::exists(sidecar))
        return base;
    std::ifstream in(sidecar);
    if (!in)
        throw IoError(sidecar.string() + ": cannot open");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(sidecar.string() + ": " + e.what());
    }
    PipelineParams p = base;
    merge_params(p, j);
    return p;
}

fs::path truth_path_for(const fs::path& image_path, const fs::path& truth_dir)
{
    return truth_dir / (image_path.stem().string() + "_mask.png");
}

ProcessedImage process_image(const fs::path& path, const PipelineParams& base, double extent_mm)
{
    ProcessedImage out;
    out.filename = path.filename().string();
    out.image = load_scan(path, extent_mm);
    out.params = params_for(path, base);
    out.params.validate(out.image.width(), out.image.height());
    out.trace = run_pipeline(out.image, out.params);
    try {
        out.measurements = measure(out.trace.faz_filled, out.image);
    } catch (const Error& e) {
        throw StageError(Stage::measure, e.what());
    }
    return out;
}

BatchResult run_batch(const RunConfig& config, std::ostream& log)
{
    BatchResult result;
    auto fatal = [&](const std::string& msg) {
        log << "[ERROR] " << msg << "\n";
        result.warnings.push_back(msg);
        result.exit_status = exit_code::fatal;
        return result;
    };

    std::error_code ec;
    if (!fs::is_directory(config.input_dir, ec))
        return fatal("input directory " + config.input_dir.string() + " does not exist");
    if (config.truth_dir && !fs::is_directory(*config.truth_dir, ec))
        return fatal("truth directory " + config.truth_dir->string() + " does not exist");
    if (auto v = config.params.violations(); !v.empty())
        return fatal("invalid parameters: " + v.front());

    const auto images = list_images(config.input_dir);
    if (images.empty())
        return fatal("no PNG or PGM images in " + config.input_dir.string());

    std::vector<ImageOutcome> outcomes(images.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < images.size(); i = next++)
            outcomes[i] = run_one(images[i], config);
    };
    const int jobs = std::clamp(config.jobs, 1, static_cast<int>(images.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < jobs; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();

    std::string csv = report::measurement_header();
    std::string vcsv = report::validation_header();
    std::vector<double> series[3][2];
    std::vector<std::string> validated_names;
    nlohmann::json vjson{{"layer", layer_name(config.layer)}, {"images", nlohmann::json::array()}};
    double dsc_sum = 0.0, ssim_sum = 0.0;
    std::size_t optimal = 0;

    for (const auto& o : outcomes) {
        for (const auto& m : o.messages) {
            log << "[WARN] " << m << "\n";
            result.warnings.push_back(m);
        }
        if (o.failed) {
            ++result.failed;
            continue;
        }
        const auto& p = *o.processed;
        ++result.processed;
        csv += report::measurement_row(p.filename, p.measurements);
        if (!o.agreement)
            continue;
        ++result.validated;
        vcsv += report::validation_row({p.filename, *o.agreement});
        dsc_sum += o.agreement->dsc;
        ssim_sum += o.agreement->ssim;
        optimal += o.agreement->label == AreaLabel::optimal ? 1 : 0;
        const auto& t = *o.truth_measurements;
        const auto& m = p.measurements;
        const double autos[3] = {m.area, m.perimeter, m.circularity};
        const double truths[3] = {t.area, t.perimeter, t.circularity};
        for (int k = 0; k < 3; ++k) {
            series[k][0].push_back(autos[k]);
            series[k][1].push_back(truths[k]);
        }
        validated_names.push_back(p.filename);
        nlohmann::json entry = *o.agreement;
        entry["filename"] = p.filename;
        vjson["images"].push_back(entry);
    }

    try {
        write_text(config.output_csv, csv);
        if (config.truth_dir) {
            report::ValidationSummary summary;
            if (result.validated > 0) {
                const double n = static_cast<double>(result.validated);
                summary.mean_dsc = dsc_sum / n;
                summary.mean_ssim = ssim_sum / n;
                summary.optimal_fraction = static_cast<double>(optimal) / n;
            }
            nlohmann::json jseries = nlohmann::json::object();
            for (int k = 0; k < 3; ++k) {
                try {
                    summary.series[k] = compare_series(series[k][0], series[k][1]);
                    jseries[std::string(report::kSeriesMetrics[k])] = *summary.series[k];
                } catch (const PreconditionError& e) {
                    const std::string msg = std::string(report::kSeriesMetrics[k]) +
                                            " agreement not computed: " + e.what();
                    log << "[WARN] " << msg << "\n";
                    result.warnings.push_back(msg);
                }
            }
            vjson["summary"] = {{"mean_dsc", summary.mean_dsc},
                                {"mean_ssim", summary.mean_ssim},
                                {"optimal_fraction", summary.optimal_fraction},
                                {"series", jseries}};
            vcsv += report::validation_footer(summary);
            result.validation_csv = sibling(config.output_csv, "_validation.csv");
            result.bland_altman_csv = sibling(config.output_csv, "_bland_altman.csv");
            result.validation_json = sibling(config.output_csv, "_validation.json");
            write_text(result.validation_csv, vcsv);
            write_text(result.bland_altman_csv, report::bland_altman_csv(summary, validated_names));
            write_text(result.validation_json, vjson.dump(2) + "\n");
        }
    } catch (const IoError& e) {
        return fatal(e.what());
    }

    result.exit_status =
        result.failed == 0 && result.processed > 0 ? exit_code::success : exit_code::partial;
    log << "[INFO] " << result.processed << " of " << images.size() << " images measured";
    if (config.truth_dir)
        log << ", " << result.validated << " validated";
    log << "\n";
    return result;
}

} // namespace fazseg
