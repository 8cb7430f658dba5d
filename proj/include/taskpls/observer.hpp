#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "taskpls/image_grid.hpp"
#include "taskpls/object_models.hpp"

namespace taskpls {

enum class TemplateKind { hotelling, npw, custom };

const char* template_kind_name(TemplateKind kind);
TemplateKind parse_template_kind(const std::string& name);

struct TrainingMeta {
  std::string ensemble_id;  // e.g. hash of the training ensemble manifest
  std::size_t n_absent = 0;
  std::size_t n_present = 0;
  std::string estimated_at;  // ISO-8601, empty when not recorded
};

/// Linear observer template w; the test statistic of image g is w^T g.
struct ObserverTemplate {
  std::vector<double> w;
  std::size_t width = 0;
  std::size_t height = 0;
  TemplateKind kind = TemplateKind::custom;
  double shrinkage = 0.0;
  TrainingMeta training_meta;

  std::span<const double> weights() const noexcept { return w; }
  double squared_norm() const noexcept;
  /// Throws ShapeError unless `image` has the template's dimensions.
  void require_compatible(const ImageGrid& image) const;
};

/// Wraps an explicit template image (kind = custom).
ObserverTemplate make_template(const ImageGrid& weights, TemplateKind kind = TemplateKind::custom);

struct HotellingOptions {
  /// Above this pixel count the regularized system is solved by conjugate
  /// gradients instead of a Cholesky factorization.
  std::size_t direct_solve_limit = 4096;
  /// Required ||A w - dm|| / ||dm||.
  double residual_tolerance = 1e-8;
  /// Samples per rank-k covariance update.
  std::size_t block_size = 256;
};

/// Hotelling template from noisy images:
///   (0.5 (K0 + K1) + rho tr(Kbar)/N I) w = m1 - m0.
/// Throws IllConditionedCovariance when rho == 0 and the sample covariance
/// is singular, InsufficientData with fewer than two images per class.
ObserverTemplate estimate_hotelling(std::span<const ImageGrid* const> absent,
                                    std::span<const ImageGrid* const> present, double shrinkage,
                                    const HotellingOptions& options = {});

ObserverTemplate estimate_hotelling(const LabeledEnsemble& ensemble, double shrinkage,
                                    const HotellingOptions& options = {});

/// Non-prewhitening matched filter: w = s. Rejects an all-zero signal.
ObserverTemplate npw_template(const ImageGrid& signal);

/// w^T g.
double test_statistic(const ObserverTemplate& tmpl, const ImageGrid& image);

/// -log N(t; w^T f, std^2 ||w||^2), the likelihood of an observed linear
/// test statistic under white Gaussian noise.
double nll_test_statistic(const ObserverTemplate& tmpl, const ImageGrid& f, double t,
                          const NoiseSpec& noise);

}  // namespace taskpls
