#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "taskpls/image_grid.hpp"
#include "taskpls/observer.hpp"

namespace taskpls::testing {

inline ImageGrid random_image(std::size_t w, std::size_t h, std::mt19937_64& rng,
                              double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(w * h);
  for (double& x : v) x = u(rng);
  return ImageGrid(w, h, std::move(v));
}

inline ObserverTemplate random_template(std::size_t w, std::size_t h, std::mt19937_64& rng) {
  return make_template(random_image(w, h, rng));
}

inline ObserverTemplate unit_template(std::size_t w, std::size_t h, std::size_t k) {
  ImageGrid e(w, h);
  e[k] = 1.0;
  return make_template(e);
}

inline double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
  const double m = sample_mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace taskpls::testing
