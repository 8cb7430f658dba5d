#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace taskpls {

/// Dense 2-D raster of doubles stored row-major.
///
/// Backgrounds, signals, noisy images, denoised estimates and difference
/// maps all travel as ImageGrid. Pixel (row, col) lives at row * width + col.
class ImageGrid {
 public:
  ImageGrid() = default;

  /// Zero-filled grid. Throws InvalidParameter on non-positive dimensions.
  ImageGrid(std::size_t width, std::size_t height);

  /// Takes ownership of `values`; throws ShapeError if the size is wrong and
  /// InvalidParameter if any value is not finite.
  ImageGrid(std::size_t width, std::size_t height, std::vector<double> values);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& at(std::size_t row, std::size_t col) { return values_[row * width_ + col]; }
  double at(std::size_t row, std::size_t col) const { return values_[row * width_ + col]; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vector() const noexcept { return values_; }

  bool same_shape(const ImageGrid& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  /// True when every value is finite.
  bool all_finite() const noexcept;

  double max_abs() const noexcept;

  ImageGrid& operator+=(const ImageGrid& other);
  ImageGrid& operator-=(const ImageGrid& other);
  ImageGrid& operator*=(double scale) noexcept;

  friend ImageGrid operator+(ImageGrid a, const ImageGrid& b) { return a += b; }
  friend ImageGrid operator-(ImageGrid a, const ImageGrid& b) { return a -= b; }
  friend ImageGrid operator*(ImageGrid a, double s) { return a *= s; }
  friend ImageGrid operator*(double s, ImageGrid a) { return a *= s; }

  bool operator==(const ImageGrid&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> values_;
};

/// Throws ShapeError naming `what` when the two grids differ in shape.
void require_same_shape(const ImageGrid& a, const ImageGrid& b, std::string_view what);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace taskpls
