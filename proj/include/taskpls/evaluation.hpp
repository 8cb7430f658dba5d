#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "taskpls/denoiser.hpp"
#include "taskpls/image_grid.hpp"
#include "taskpls/object_models.hpp"
#include "taskpls/observer.hpp"

namespace taskpls {

struct ScoreSet {
  std::vector<double> absent_scores;
  std::vector<double> present_scores;
};

struct RocPoint {
  double threshold = 0.0;  // classify H1 when score >= threshold
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocResult {
  /// From (0, 0) at threshold +inf to (1, 1) at the lowest score.
  std::vector<RocPoint> operating_points;
  double auc = 0.0;
  double auc_std_err = 0.0;
  std::size_t n_absent = 0;
  std::size_t n_present = 0;
};

/// Empirical ROC over all distinct thresholds. AUC is the Mann-Whitney
/// statistic with ties counted 1/2; the standard error follows Hanley and
/// McNeil. Higher scores indicate H1; no sign flipping is applied.
RocResult roc_curve(const ScoreSet& scores);

/// Trapezoidal area under the operating points.
double trapezoid_auc(const std::vector<RocPoint>& points);

double rmse(const ImageGrid& a, const ImageGrid& b);

/// f_task - f_plain.
ImageGrid difference_map(const ImageGrid& f_task, const ImageGrid& f_plain);

struct PipelineOptions {
  std::size_t jobs = 1;
};

/// Scores every noisy image of the ensemble (after denoising it first when a
/// config is given) and returns the ROC. Denoiser divergence is rethrown as
/// DivergenceError naming the item index.
RocResult evaluate_pipeline(const LabeledEnsemble& ensemble, const ObserverTemplate& tmpl,
                            const std::optional<DenoiseConfig>& denoise_config,
                            const PipelineOptions& options = {});

/// CSV with header threshold,fpr,tpr.
std::string roc_to_csv(const RocResult& roc);

/// {"auc", "auc_std_err", "n_absent", "n_present"} as a JSON document.
std::string roc_summary_json(const RocResult& roc);

}  // namespace taskpls
