#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <png.h>

#include "fazseg/image_io.hpp"
#include "oracles.hpp"

using namespace fazseg;
using namespace fazseg::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "fazseg_test_image_io";
    fs::create_directories(dir);
    return dir / name;
}

GrayImage noise_image(int w, int h, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h);
    for (auto& v : px)
        v = static_cast<std::uint8_t>(rng.integer(0, 255));
    return GrayImage(frame(w, h), px);
}

std::vector<std::uint8_t> png_rgb(int w, int h, const std::vector<std::uint8_t>& rgb)
{
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = w;
    img.height = h;
    img.format = PNG_FORMAT_RGB;
    png_alloc_size_t size = 0;
    png_image_write_to_memory(&img, nullptr, &size, 0, rgb.data(), 0, nullptr);
    std::vector<std::uint8_t> out(size);
    REQUIRE(png_image_write_to_memory(&img, out.data(), &size, 0, rgb.data(), 0, nullptr));
    out.resize(size);
    return out;
}

} // namespace

TEST_CASE("420x420 PGM with 6 mm extent")
{
    const auto path = scratch("scan.pgm");
    save_gray(path, noise_image(420, 420, 1));
    const GrayImage img = load_scan(path, 6.0);
    CHECK(img.width() == 420);
    CHECK(img.scale().mm_per_px == doctest::Approx(6.0 / 420.0).epsilon(1e-15));
    CHECK(img == noise_image(420, 420, 1));
}

TEST_CASE("3x3 all-zero image decodes")
{
    const GrayImage z(frame(3, 3));
    const auto img = decode_gray(encode_png(z), z.scale());
    CHECK(img == z);
}

TEST_CASE("round trips for PNG, PGM and masks")
{
    const GrayImage img = noise_image(37, 23, 5);
    CHECK(decode_gray(encode_png(img), img.scale()) == img);
    CHECK(decode_gray(encode_pgm(img), img.scale()) == img);

    Rng rng(3);
    const BinaryMask m = random_mask(rng, 31, 17, 0.4);
    const auto path = scratch("m_mask.png");
    save_mask(path, m);
    CHECK(load_mask(path, m.scale()) == m);
    const GrayImage raw = load_gray(path, m.scale());
    for (auto v : raw.data())
        CHECK((v == 0 || v == 255));
}

TEST_CASE("truncated files fail without a partial image")
{
    const GrayImage img = noise_image(20, 20, 2);
    auto pgm = encode_pgm(img);
    pgm.resize(pgm.size() - 10);
    CHECK_THROWS_AS(decode_gray(pgm, img.scale()), IoError);
    auto png = encode_png(img);
    png.resize(png.size() / 2);
    CHECK_THROWS_AS(decode_gray(png, img.scale()), IoError);
}

TEST_CASE("errors name the path")
{
    const auto path = scratch("does_not_exist.png");
    try {
        load_gray(path, {});
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("does_not_exist.png") != std::string::npos);
    }
}

TEST_CASE("16-bit PNG is rejected")
{
    png_image im{};
    im.version = PNG_IMAGE_VERSION;
    im.width = 4;
    im.height = 4;
    im.format = PNG_FORMAT_LINEAR_Y;
    std::vector<std::uint16_t> px(16, 1000);
    png_alloc_size_t size = 0;
    png_image_write_to_memory(&im, nullptr, &size, 0, px.data(), 0, nullptr);
    std::vector<std::uint8_t> bytes(size);
    REQUIRE(png_image_write_to_memory(&im, bytes.data(), &size, 0, px.data(), 0, nullptr));
    bytes.resize(size);
    CHECK_THROWS_AS(decode_gray(bytes, {}, "deep.png"), IoError);
}

TEST_CASE("color PNG converts by integer luminance")
{
    const std::vector<std::uint8_t> rgb = {
        255, 0, 0,   0, 255, 0,   0, 0, 255,
        10, 20, 30,  200, 100, 50, 255, 255, 255,
        0, 0, 0,     1, 2, 3,     128, 128, 128,
    };
    const auto img = decode_gray(png_rgb(3, 3, rgb), {});
    for (int i = 0; i < 9; ++i) {
        const int r = rgb[3 * i], g = rgb[3 * i + 1], b = rgb[3 * i + 2];
        const long expected = std::lround(0.299 * r + 0.587 * g + 0.114 * b);
        CHECK(img.data()[i] == expected);
    }
}

TEST_CASE("non-square scan takes its scale from the width")
{
    const auto img = decode_scan(encode_png(noise_image(300, 200, 4)), 6.0);
    CHECK(img.scale().mm_per_px == doctest::Approx(0.02));
    CHECK(img.height() == 200);
}

TEST_CASE("PGM header comments and maxval")
{
    std::string s = "P5\n# comment\n3 3\n# another\n255\n";
    s.append(9, '\x07');
    std::vector<std::uint8_t> bytes(s.begin(), s.end());
    const auto img = decode_gray(bytes, {});
    CHECK(img(2, 2) == 7);
    std::string deep = "P5\n3 3\n65535\n";
    deep.append(18, '\0');
    CHECK_THROWS_AS(decode_gray(std::vector<std::uint8_t>(deep.begin(), deep.end()), {}),
                    IoError);
}
