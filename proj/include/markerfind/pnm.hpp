#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "markerfind/image.hpp"

namespace mf {

using AnyImage = std::variant<GrayImage, ColorImage>;

/**
 * Parses a binary PNM stream: "P5" (gray) or "P6" (RGB) with maxval 255.
 *
 * Header tokens may be separated by any whitespace and `#` comments; exactly
 * one whitespace byte separates maxval from the payload. Bytes after the
 * payload are ignored. Failures throw PnmParseError with a kind that
 * distinguishes bad magic, bad maxval, malformed header and short payload.
 */
AnyImage load_pnm(std::span<const std::uint8_t> bytes);

/// Canonical encoding: "P5\n<w> <h>\n255\n" (or P6) followed by the raw payload.
std::vector<std::uint8_t> save_pnm(const GrayImage& img);
std::vector<std::uint8_t> save_pnm(const ColorImage& img);
std::vector<std::uint8_t> save_pnm(const AnyImage& img);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);

AnyImage read_pnm_file(const std::filesystem::path& path);

} // namespace mf
