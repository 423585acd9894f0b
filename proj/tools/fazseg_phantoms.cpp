// Writes a synthetic OCTA phantom dataset with ground-truth masks.

#include <CLI11.hpp>

#include <iostream>

#include "phantom.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Generate synthetic FAZ phantoms"};
    std::string out_dir = "phantoms";
    std::string truth_dir;
    int count = 10;
    std::uint64_t seed = 1;
    app.add_option("--output", out_dir, "Image directory");
    app.add_option("--truth", truth_dir, "Mask directory (default: <output>/truth)");
    app.add_option("--count", count, "Number of phantoms")->check(CLI::Range(1, 10000));
    app.add_option("--seed", seed, "First seed");
    CLI11_PARSE(app, argc, argv);
    if (truth_dir.empty())
        truth_dir = out_dir + "/truth";
    fazseg::testing::write_phantom_set(out_dir, truth_dir, count, seed);
    std::cerr << "[INFO] wrote " << count << " phantoms to " << out_dir << "\n";
    return 0;
}
