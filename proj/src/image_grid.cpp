#include "taskpls/image_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "taskpls/errors.hpp"

namespace taskpls {

ImageGrid::ImageGrid(std::size_t width, std::size_t height)
    : width_(width), height_(height) {
  if (width == 0 || height == 0) {
    throw InvalidParameter("image dimensions must be positive");
  }
  values_.assign(width * height, 0.0);
}

ImageGrid::ImageGrid(std::size_t width, std::size_t height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width == 0 || height == 0) {
    throw InvalidParameter("image dimensions must be positive");
  }
  if (values_.size() != width * height) {
    throw ShapeError("image has " + std::to_string(values_.size()) + " values, expected " +
                     std::to_string(width) + "x" + std::to_string(height));
  }
  if (!all_finite()) {
    throw InvalidParameter("image contains non-finite values");
  }
}

bool ImageGrid::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ImageGrid::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

ImageGrid& ImageGrid::operator+=(const ImageGrid& other) {
  require_same_shape(*this, other, "image addition");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ImageGrid& ImageGrid::operator-=(const ImageGrid& other) {
  require_same_shape(*this, other, "image subtraction");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ImageGrid& ImageGrid::operator*=(double scale) noexcept {
  for (double& v : values_) v *= scale;
  return *this;
}

void require_same_shape(const ImageGrid& a, const ImageGrid& b, std::string_view what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shape mismatch (" + std::to_string(a.width()) + "x" +
                     std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                     std::to_string(b.height()) + ")");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("dot: length mismatch (" + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace taskpls
