#include "taskpls/denoiser.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <span>
#include <sstream>

#include "taskpls/errors.hpp"

namespace taskpls {

namespace {

// Smoothed TV value; when `grad` is non-empty its gradient is added to it.
double tv_accumulate(std::span<const double> f, std::size_t width, std::size_t height,
                     double eps, std::span<double> grad) {
  const bool want_grad = !grad.empty();
  double total = 0.0;
  for (std::size_t r = 0; r < height; ++r) {
    const std::size_t row = r * width;
    for (std::size_t c = 0; c < width; ++c) {
      const std::size_t i = row + c;
      const double dx = c + 1 < width ? f[i + 1] - f[i] : 0.0;
      const double dy = r + 1 < height ? f[i + width] - f[i] : 0.0;
      const double mag = std::sqrt(dx * dx + dy * dy + eps * eps);
      total += mag - eps;
      if (want_grad) {
        const double px = dx / mag;
        const double py = dy / mag;
        grad[i] -= px + py;
        if (c + 1 < width) grad[i + 1] += px;
        if (r + 1 < height) grad[i + width] += py;
      }
    }
  }
  return total;
}

// Objective terms at f; also writes the gradient when `grad` is non-empty.
ObjectiveTerms evaluate(std::span<const double> f, const ImageGrid& g, std::span<const double> w,
                        double wg, const DenoiseConfig& config, std::span<double> grad) {
  const std::size_t n = f.size();
  const bool want_grad = !grad.empty();
  ObjectiveTerms terms;

  double wf = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = f[i] - g[i];
    terms.fidelity += d * d;
    wf += w[i] * f[i];
    if (want_grad) grad[i] = 2.0 * config.alpha * d;
  }
  const double dt = wg - wf;
  terms.task = dt * dt;

  if (config.beta != 0.0 && want_grad) {
    // Gradient of the TV term is accumulated unscaled then folded in.
    thread_local std::vector<double> tv_grad;
    tv_grad.assign(n, 0.0);
    terms.tv = tv_accumulate(f, g.width(), g.height(), config.tv_epsilon, tv_grad);
    for (std::size_t i = 0; i < n; ++i) grad[i] += config.beta * tv_grad[i];
  } else {
    terms.tv = tv_accumulate(f, g.width(), g.height(), config.tv_epsilon, {});
  }

  if (want_grad && config.gamma != 0.0) {
    const double k = -2.0 * config.gamma * dt;
    for (std::size_t i = 0; i < n; ++i) grad[i] += k * w[i];
  }
  terms.total = config.alpha * terms.fidelity + config.beta * terms.tv + config.gamma * terms.task;
  return terms;
}

void require_inputs(const ImageGrid& f, const ImageGrid& g, const ObserverTemplate& tmpl) {
  require_same_shape(f, g, "objective");
  tmpl.require_compatible(f);
}

}  // namespace

const char* init_rule_name(InitRule rule) {
  return rule == InitRule::zeros ? "zeros" : "noisy_input";
}

InitRule parse_init_rule(const std::string& name) {
  if (name == "noisy_input") return InitRule::noisy_input;
  if (name == "zeros") return InitRule::zeros;
  throw InvalidParameter("unknown init rule '" + name + "'");
}

void DenoiseConfig::validate() const {
  for (double v : {alpha, beta, gamma}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidParameter("alpha, beta and gamma must be finite and >= 0");
    }
  }
  if (alpha == 0.0 && beta == 0.0 && gamma == 0.0) {
    throw InvalidParameter("alpha, beta and gamma cannot all be zero");
  }
  if (!(tv_epsilon > 0.0)) throw InvalidParameter("tv_epsilon must be > 0");
  if (iterations < 1) throw InvalidParameter("iterations must be >= 1");
  if (!(step_size > 0.0)) throw InvalidParameter("step_size must be > 0");
  if (!(moment_decay_1 >= 0.0 && moment_decay_1 < 1.0) ||
      !(moment_decay_2 >= 0.0 && moment_decay_2 < 1.0)) {
    throw InvalidParameter("moment decay rates must lie in [0, 1)");
  }
  if (!(moment_epsilon >= 0.0)) throw InvalidParameter("moment_epsilon must be >= 0");
  if (trace_stride < 1) throw InvalidParameter("trace_stride must be >= 1");
}

double tv_seminorm(const ImageGrid& image, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidParameter("TV epsilon must be > 0");
  return tv_accumulate(image.values(), image.width(), image.height(), epsilon, {});
}

ImageGrid tv_gradient(const ImageGrid& image, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidParameter("TV epsilon must be > 0");
  ImageGrid grad(image.width(), image.height());
  tv_accumulate(image.values(), image.width(), image.height(), epsilon, grad.values());
  return grad;
}

double task_penalty(const ImageGrid& f, const ImageGrid& g, const ObserverTemplate& tmpl) {
  require_inputs(f, g, tmpl);
  const double d = dot(tmpl.weights(), g.values()) - dot(tmpl.weights(), f.values());
  return d * d;
}

ObjectiveTerms objective_terms(const ImageGrid& f, const ImageGrid& g,
                               const ObserverTemplate& tmpl, const DenoiseConfig& config) {
  require_inputs(f, g, tmpl);
  if (!(config.tv_epsilon > 0.0)) throw InvalidParameter("TV epsilon must be > 0");
  const double wg = dot(tmpl.weights(), g.values());
  return evaluate(f.values(), g, tmpl.weights(), wg, config, {});
}

double objective(const ImageGrid& f, const ImageGrid& g, const ObserverTemplate& tmpl,
                 const DenoiseConfig& config) {
  return objective_terms(f, g, tmpl, config).total;
}

ImageGrid objective_gradient(const ImageGrid& f, const ImageGrid& g,
                             const ObserverTemplate& tmpl, const DenoiseConfig& config) {
  require_inputs(f, g, tmpl);
  if (!(config.tv_epsilon > 0.0)) throw InvalidParameter("TV epsilon must be > 0");
  ImageGrid grad(f.width(), f.height());
  const double wg = dot(tmpl.weights(), g.values());
  evaluate(f.values(), g, tmpl.weights(), wg, config, grad.values());
  return grad;
}

DenoiseResult denoise(const ImageGrid& g, const ObserverTemplate& tmpl,
                      const DenoiseConfig& config) {
  config.validate();
  tmpl.require_compatible(g);

  const std::size_t n = g.size();
  std::vector<double> f = config.init == InitRule::noisy_input ? g.vector()
                                                               : std::vector<double>(n, 0.0);
  std::vector<double> grad(n), m1(n, 0.0), m2(n, 0.0);
  const auto w = tmpl.weights();
  const double wg = dot(w, g.values());

  DenoiseResult result;
  result.objective_trace.reserve(config.iterations / config.trace_stride + 2);

  const double b1 = config.moment_decay_1;
  const double b2 = config.moment_decay_2;
  double b1_power = 1.0;
  double b2_power = 1.0;
  double initial = 0.0;

  for (std::size_t it = 0; it < config.iterations; ++it) {
    const ObjectiveTerms terms = evaluate(f, g, w, wg, config, grad);
    if (it == 0) initial = terms.total;
    if (!std::isfinite(terms.total) || (initial > 0.0 && terms.total > 1e6 * initial)) {
      throw DivergenceError(it, "denoiser diverged at iteration " + std::to_string(it) +
                                    " (objective " + std::to_string(terms.total) + ")");
    }
    if (it % config.trace_stride == 0) result.objective_trace.push_back({it, terms});

    b1_power *= b1;
    b2_power *= b2;
    const double c1 = 1.0 - b1_power;
    const double c2 = 1.0 - b2_power;
    for (std::size_t i = 0; i < n; ++i) {
      m1[i] = b1 * m1[i] + (1.0 - b1) * grad[i];
      m2[i] = b2 * m2[i] + (1.0 - b2) * grad[i] * grad[i];
      f[i] -= config.step_size * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + config.moment_epsilon);
    }
  }

  result.terms_final = evaluate(f, g, w, wg, config, {});
  if (!std::isfinite(result.terms_final.total) ||
      (initial > 0.0 && result.terms_final.total > 1e6 * initial)) {
    throw DivergenceError(config.iterations, "denoiser diverged at iteration " +
                                                 std::to_string(config.iterations));
  }
  result.objective_trace.push_back({config.iterations, result.terms_final});
  result.estimate = ImageGrid(g.width(), g.height(), std::move(f));
  return result;
}

std::string trace_to_csv(const std::vector<TracePoint>& trace) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "iteration,objective,fidelity,tv,task\n";
  for (const auto& p : trace) {
    out << p.iteration << ',' << p.terms.total << ',' << p.terms.fidelity << ',' << p.terms.tv
        << ',' << p.terms.task << '\n';
  }
  return out.str();
}

}  // namespace taskpls
