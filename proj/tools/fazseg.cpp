// Batch FAZ segmentation: one measurement row per image, optional validation
// against ground-truth masks.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "fazseg/batch.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Segment and measure the foveal avascular zone in a directory of OCTA images"};
    fazseg::RunConfig config;
    std::string params_file;
    std::string truth_dir;
    std::string layer = "unspecified";

    app.add_option("--input", config.input_dir, "Directory of PNG/PGM en-face images")->required();
    app.add_option("--output", config.output_csv, "Measurement CSV to write")->required();
    app.add_option("--params", params_file, "Pipeline parameter JSON");
    app.add_option("--truth", truth_dir, "Directory of <name>_mask.png ground-truth masks");
    app.add_option("--layer", layer, "Retinal layer tag")
        ->check(CLI::IsMember({"superficial", "deep", "unspecified"}));
    app.add_option("--extent-mm", config.extent_mm, "Physical width of each scan in mm")
        ->check(CLI::PositiveNumber);
    app.add_option("--jobs", config.jobs, "Worker threads")->check(CLI::Range(1, 256));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : fazseg::exit_code::fatal;
    }

    try {
        config.layer = fazseg::parse_layer(layer);
        if (!params_file.empty()) {
            std::ifstream in(params_file);
            if (!in) {
                std::cerr << "[ERROR] cannot open parameter file " << params_file << "\n";
                return fazseg::exit_code::fatal;
            }
            config.params = nlohmann::json::parse(in).get<fazseg::PipelineParams>();
        }
        if (!truth_dir.empty())
            config.truth_dir = truth_dir;
    } catch (const std::exception& e) {
        std::cerr << "[ERROR] " << e.what() << "\n";
        return fazseg::exit_code::fatal;
    }

    const auto result = fazseg::run_batch(config, std::cerr);
    return result.exit_status;
}
