#include "taskpls/raster_io.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "taskpls/errors.hpp"

namespace taskpls {

namespace fs = std::filesystem;

namespace {

static_assert(sizeof(double) == 8);

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return __builtin_bswap64(v);
  }
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string());
  }
}

}  // namespace

void write_f64(const fs::path& path, std::span<const double> values) {
  ensure_parent(path);
  std::vector<std::uint64_t> words(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    words[i] = to_little_endian(std::bit_cast<std::uint64_t>(values[i]));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(words.data()),
            static_cast<std::streamsize>(words.size() * sizeof(std::uint64_t)));
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<double> read_f64(const fs::path& path, std::size_t expected_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint64_t> words(expected_count);
  in.read(reinterpret_cast<char*>(words.data()),
          static_cast<std::streamsize>(words.size() * sizeof(std::uint64_t)));
  if (static_cast<std::size_t>(in.gcount()) != expected_count * sizeof(std::uint64_t) ||
      in.peek() != std::char_traits<char>::eof()) {
    throw IoError(path.string() + " does not hold exactly " + std::to_string(expected_count) +
                  " float64 values");
  }
  std::vector<double> values(expected_count);
  for (std::size_t i = 0; i < expected_count; ++i) {
    values[i] = std::bit_cast<double>(to_little_endian(words[i]));
  }
  return values;
}

void write_raster(const fs::path& path, const ImageGrid& image) {
  write_f64(path, image.values());
}

ImageGrid read_raster(const fs::path& path, std::size_t width, std::size_t height) {
  return ImageGrid(width, height, read_f64(path, width * height));
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_text(path)); }

void verify_sha256(const fs::path& path, const std::string& expected) {
  const std::string actual = sha256_file(path);
  if (actual != expected) {
    throw IntegrityError("hash mismatch for " + path.string() + ": manifest records " + expected +
                         ", file has " + actual);
  }
}

void write_text(const fs::path& path, std::string_view text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<unsigned char> window_to_8bit(const ImageGrid& image, double lo, double hi) {
  if (!(hi > lo)) throw InvalidParameter("PNG window needs hi > lo");
  std::vector<unsigned char> out(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double t = std::clamp((image[i] - lo) / (hi - lo), 0.0, 1.0);
    out[i] = static_cast<unsigned char>(std::lround(t * 255.0));
  }
  return out;
}

void write_png(const fs::path& path, const ImageGrid& image, double lo, double hi) {
  const auto pixels = window_to_8bit(image, lo, hi);
  ensure_parent(path);

  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw IoError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng failed writing " + path.string());
  }

  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()),
               static_cast<png_uint_32>(image.height()), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < image.height(); ++r) {
    png_write_row(png, const_cast<png_bytep>(pixels.data() + r * image.width()));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace taskpls
