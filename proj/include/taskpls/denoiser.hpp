#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "taskpls/image_grid.hpp"
#include "taskpls/observer.hpp"

namespace taskpls {

enum class InitRule { noisy_input, zeros };

const char* init_rule_name(InitRule rule);
InitRule parse_init_rule(const std::string& name);

/// Weights and solver settings for
///   alpha ||f - g||^2 + beta TV_eps(f) + gamma (w^T g - w^T f)^2
/// minimized with bias-corrected adaptive-moment (Adam) updates.
struct DenoiseConfig {
  double alpha = 1.0;
  double beta = 0.05;
  double gamma = 0.0;
  double tv_epsilon = 1e-6;
  std::size_t iterations = 10000;
  double step_size = 1e-4;
  double moment_decay_1 = 0.9;
  double moment_decay_2 = 0.999;
  double moment_epsilon = 1e-8;
  InitRule init = InitRule::noisy_input;
  /// Record every n-th iterate in the objective trace (the final iterate is
  /// always recorded).
  std::size_t trace_stride = 1;

  void validate() const;
  bool operator==(const DenoiseConfig&) const = default;
};

/// Unweighted terms of the objective plus the weighted total.
struct ObjectiveTerms {
  double fidelity = 0.0;  // ||f - g||^2
  double tv = 0.0;        // smoothed TV of f
  double task = 0.0;      // (w^T g - w^T f)^2
  double total = 0.0;
};

struct TracePoint {
  std::size_t iteration = 0;
  ObjectiveTerms terms;
};

struct DenoiseResult {
  ImageGrid estimate;
  std::vector<TracePoint> objective_trace;
  ObjectiveTerms terms_final;
};

/// Isotropic smoothed TV: sum over pixels of sqrt(Dx^2 + Dy^2 + eps^2) - eps
/// with forward differences that vanish on the last column / row.
double tv_seminorm(const ImageGrid& image, double epsilon);

/// Gradient of tv_seminorm with respect to the image.
ImageGrid tv_gradient(const ImageGrid& image, double epsilon);

/// (w^T g - w^T f)^2.
double task_penalty(const ImageGrid& f, const ImageGrid& g, const ObserverTemplate& tmpl);

ObjectiveTerms objective_terms(const ImageGrid& f, const ImageGrid& g,
                               const ObserverTemplate& tmpl, const DenoiseConfig& config);

double objective(const ImageGrid& f, const ImageGrid& g, const ObserverTemplate& tmpl,
                 const DenoiseConfig& config);

/// 2 alpha (f - g) + beta grad TV_eps(f) - 2 gamma (w^T g - w^T f) w.
ImageGrid objective_gradient(const ImageGrid& f, const ImageGrid& g,
                             const ObserverTemplate& tmpl, const DenoiseConfig& config);

/// Runs config.iterations Adam steps from the configured initial image.
/// Throws DivergenceError if the objective becomes non-finite or exceeds
/// 1e6 times its initial value.
DenoiseResult denoise(const ImageGrid& g, const ObserverTemplate& tmpl,
                      const DenoiseConfig& config);

/// CSV with header iteration,objective,fidelity,tv,task.
std::string trace_to_csv(const std::vector<TracePoint>& trace);

}  // namespace taskpls
