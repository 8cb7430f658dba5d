#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taskpls/image_grid.hpp"

namespace taskpls {

/// Flat little-endian float64 vector, no header.
void write_f64(const std::filesystem::path& path, std::span<const double> values);
std::vector<double> read_f64(const std::filesystem::path& path, std::size_t expected_count);

/// Row-major raster; dimensions live in the owning manifest.
void write_raster(const std::filesystem::path& path, const ImageGrid& image);
ImageGrid read_raster(const std::filesystem::path& path, std::size_t width, std::size_t height);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Throws IntegrityError when the file hash differs from `expected`.
void verify_sha256(const std::filesystem::path& path, const std::string& expected);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

/// Linear window [lo, hi] onto 0..255, clamped. Display only: the mapping
/// is lossy and PNGs are never read back for computation.
std::vector<unsigned char> window_to_8bit(const ImageGrid& image, double lo, double hi);

void write_png(const std::filesystem::path& path, const ImageGrid& image, double lo, double hi);

}  // namespace taskpls
