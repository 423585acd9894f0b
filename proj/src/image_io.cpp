#include "fazseg/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>

namespace fazseg {

namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

bool is_png(std::span<const std::uint8_t> bytes)
{
    return bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0;
}

std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b)
{
    return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

GrayImage decode_png(std::span<const std::uint8_t> bytes, const PhysicalScale& scale,
                     const std::string& name)
{
    // IHDR is always the first chunk: signature(8) length(4) type(4) w(4) h(4) depth(1).
    if (bytes.size() < 33 || std::memcmp(bytes.data() + 12, "IHDR", 4) != 0)
        throw IoError(name + ": malformed PNG header");
    const int bit_depth = bytes[24];
    if (bit_depth > 8)
        throw IoError(name + ": unsupported PNG bit depth " + std::to_string(bit_depth));

    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
        throw IoError(name + ": " + image.message);

    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const int w = static_cast<int>(image.width);
    const int h = static_cast<int>(image.height);
    std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw IoError(name + ": " + msg);
    }

    std::vector<std::uint8_t> gray;
    if (color) {
        gray.resize(static_cast<std::size_t>(w) * h);
        for (std::size_t i = 0; i < gray.size(); ++i)
            gray[i] = luminance(buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2]);
    } else {
        gray = std::move(buffer);
    }
    return GrayImage(Geometry{w, h, scale}, std::move(gray));
}

GrayImage decode_pgm(std::span<const std::uint8_t> bytes, const PhysicalScale& scale,
                     const std::string& name)
{
    std::size_t pos = 2;
    auto next_int = [&]() -> long {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n')
                    ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
        long value = 0;
        int digits = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            value = value * 10 + (bytes[pos] - '0');
            if (value > 1'000'000)
                throw IoError(name + ": PGM header value out of range");
            ++pos;
            ++digits;
        }
        if (digits == 0)
            throw IoError(name + ": malformed PGM header");
        return value;
    };
    const long w = next_int();
    const long h = next_int();
    const long maxval = next_int();
    if (maxval <= 0 || maxval > 255)
        throw IoError(name + ": unsupported PGM maxval " + std::to_string(maxval));
    if (pos >= bytes.size() || !std::isspace(bytes[pos]))
        throw IoError(name + ": malformed PGM header");
    ++pos;
    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (bytes.size() - pos < n)
        throw IoError(name + ": truncated PGM data");
    std::vector<std::uint8_t> pixels(bytes.begin() + pos, bytes.begin() + pos + n);
    return GrayImage(Geometry{static_cast<int>(w), static_cast<int>(h), scale}, std::move(pixels));
}

std::vector<std::uint8_t> encode_gray_png(int w, int h, const std::uint8_t* pixels)
{
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(w);
    image.height = static_cast<png_uint_32>(h);
    image.format = PNG_FORMAT_GRAY;
    png_alloc_size_t size = 0;
    if (!png_image_write_get_memory_size(image, size, 0, pixels, 0, nullptr))
        throw IoError(std::string("PNG encode failed: ") + image.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels, 0, nullptr))
        throw IoError(std::string("PNG encode failed: ") + image.message);
    out.resize(size);
    return out;
}

bool has_pgm_extension(const std::filesystem::path& path)
{
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".pgm";
}

} // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError(path.string() + ": cannot open file");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad())
        throw IoError(path.string() + ": read error");
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError(path.string() + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError(path.string() + ": write error");
}

GrayImage decode_gray(std::span<const std::uint8_t> bytes, const PhysicalScale& scale,
                      const std::string& name)
{
    if (is_png(bytes))
        return decode_png(bytes, scale, name);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5')
        return decode_pgm(bytes, scale, name);
    if (bytes.size() >= 2 && bytes[0] == 'P' && std::isdigit(bytes[1]))
        throw IoError(name + ": only binary PGM (P5) is supported");
    throw IoError(name + ": not a PNG or PGM file");
}

GrayImage load_gray(const std::filesystem::path& path, const PhysicalScale& scale)
{
    const auto bytes = read_file(path);
    return decode_gray(bytes, scale, path.string());
}

GrayImage decode_scan(std::span<const std::uint8_t> bytes, double extent_mm,
                      const std::string& name)
{
    GrayImage img = decode_gray(bytes, PhysicalScale{}, name);
    // Non-square exports take their scale from the width.
    const auto scale = PhysicalScale::from_scan(extent_mm, img.width());
    std::vector<std::uint8_t> pixels(img.data().begin(), img.data().end());
    return GrayImage(Geometry{img.width(), img.height(), scale}, std::move(pixels));
}

GrayImage load_scan(const std::filesystem::path& path, double extent_mm)
{
    const auto bytes = read_file(path);
    return decode_scan(bytes, extent_mm, path.string());
}

BinaryMask load_mask(const std::filesystem::path& path, const PhysicalScale& scale)
{
    const GrayImage img = load_gray(path, scale);
    std::vector<std::uint8_t> bits(img.data().begin(), img.data().end());
    return BinaryMask(img.geometry(), std::move(bits));
}

std::vector<std::uint8_t> encode_png(const GrayImage& img)
{
    return encode_gray_png(img.width(), img.height(), img.data().data());
}

std::vector<std::uint8_t> encode_png(const BinaryMask& mask)
{
    std::vector<std::uint8_t> pixels(mask.size());
    auto bits = mask.data();
    for (std::size_t i = 0; i < pixels.size(); ++i)
        pixels[i] = bits[i] ? 255 : 0;
    return encode_gray_png(mask.width(), mask.height(), pixels.data());
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img)
{
    const std::string header =
        "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.data().begin(), img.data().end());
    return out;
}

void save_gray(const std::filesystem::path& path, const GrayImage& img)
{
    write_file(path, has_pgm_extension(path) ? encode_pgm(img) : encode_png(img));
}

void save_mask(const std::filesystem::path& path, const BinaryMask& mask)
{
    write_file(path, encode_png(mask));
}

} // namespace fazseg
