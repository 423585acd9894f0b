#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fazseg/image.hpp"

namespace fazseg {

/// Decodes 8-bit PNG (gray, palette, or color) or binary PGM (P5, maxval <= 255).
/// Color is reduced to gray with round(0.299R + 0.587G + 0.114B) in integer arithmetic.
GrayImage decode_gray(std::span<const std::uint8_t> bytes, const PhysicalScale& scale,
                      const std::string& name = "<memory>");

GrayImage load_gray(const std::filesystem::path& path, const PhysicalScale& scale);

/// Loads an image and derives its scale from `extent_mm` spread over the image width.
GrayImage load_scan(const std::filesystem::path& path, double extent_mm);
GrayImage decode_scan(std::span<const std::uint8_t> bytes, double extent_mm,
                      const std::string& name = "<memory>");

/// Any non-zero pixel is foreground.
BinaryMask load_mask(const std::filesystem::path& path, const PhysicalScale& scale);

std::vector<std::uint8_t> encode_png(const GrayImage& img);
/// Masks encode as gray PNG with values {0, 255}.
std::vector<std::uint8_t> encode_png(const BinaryMask& mask);
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);

/// Format chosen by extension: .pgm writes P5, anything else PNG.
void save_gray(const std::filesystem::path& path, const GrayImage& img);
void save_mask(const std::filesystem::path& path, const BinaryMask& mask);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

} // namespace fazseg
