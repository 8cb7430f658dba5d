#include "taskpls/observer.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "taskpls/errors.hpp"

namespace taskpls {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct ClassMoments {
  VectorXd mean;
  MatrixXd scatter;  // sum of outer products of centred samples, lower triangle
  std::size_t count = 0;
};

ClassMoments accumulate(std::span<const ImageGrid* const> images, std::size_t n,
                        std::size_t block_size) {
  ClassMoments m;
  m.count = images.size();
  m.mean = VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (const ImageGrid* img : images) {
    m.mean += Eigen::Map<const VectorXd>(img->values().data(), static_cast<Eigen::Index>(n));
  }
  m.mean /= static_cast<double>(m.count);

  m.scatter = MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  block_size = std::max<std::size_t>(1, block_size);
  MatrixXd block;
  for (std::size_t start = 0; start < images.size(); start += block_size) {
    const std::size_t len = std::min(block_size, images.size() - start);
    block.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(len));
    for (std::size_t j = 0; j < len; ++j) {
      block.col(static_cast<Eigen::Index>(j)) =
          Eigen::Map<const VectorXd>(images[start + j]->values().data(),
                                     static_cast<Eigen::Index>(n)) -
          m.mean;
    }
    m.scatter.selfadjointView<Eigen::Lower>().rankUpdate(block);
  }
  return m;
}

}  // namespace

const char* template_kind_name(TemplateKind kind) {
  switch (kind) {
    case TemplateKind::hotelling:
      return "hotelling";
    case TemplateKind::npw:
      return "npw";
    case TemplateKind::custom:
      return "custom";
  }
  return "custom";
}

TemplateKind parse_template_kind(const std::string& name) {
  if (name == "hotelling") return TemplateKind::hotelling;
  if (name == "npw") return TemplateKind::npw;
  if (name == "custom") return TemplateKind::custom;
  throw InvalidParameter("unknown template kind '" + name + "'");
}

double ObserverTemplate::squared_norm() const noexcept {
  double s = 0.0;
  for (double v : w) s += v * v;
  return s;
}

void ObserverTemplate::require_compatible(const ImageGrid& image) const {
  if (image.width() != width || image.height() != height || image.size() != w.size()) {
    throw ShapeError("template is " + std::to_string(width) + "x" + std::to_string(height) +
                     " but image is " + std::to_string(image.width()) + "x" +
                     std::to_string(image.height()));
  }
}

ObserverTemplate make_template(const ImageGrid& weights, TemplateKind kind) {
  ObserverTemplate t;
  t.w = weights.vector();
  t.width = weights.width();
  t.height = weights.height();
  t.kind = kind;
  return t;
}

ObserverTemplate estimate_hotelling(std::span<const ImageGrid* const> absent,
                                    std::span<const ImageGrid* const> present, double shrinkage,
                                    const HotellingOptions& options) {
  if (absent.size() < 2 || present.size() < 2) {
    throw InsufficientData("Hotelling estimation needs at least two images per class");
  }
  if (!(shrinkage >= 0.0) || !std::isfinite(shrinkage)) {
    throw InvalidParameter("shrinkage must be finite and >= 0");
  }
  const ImageGrid& first = *absent.front();
  for (auto group : {absent, present}) {
    for (const ImageGrid* img : group) require_same_shape(first, *img, "Hotelling estimation");
  }
  const std::size_t n = first.size();
  const std::size_t dof = absent.size() + present.size() - 2;
  if (shrinkage == 0.0 && dof < n) {
    throw IllConditionedCovariance(
        "sample covariance is singular (" + std::to_string(dof) + " degrees of freedom for " +
        std::to_string(n) + " pixels); use a positive shrinkage");
  }

  const ClassMoments h0 = accumulate(absent, n, options.block_size);
  const ClassMoments h1 = accumulate(present, n, options.block_size);

  MatrixXd a = 0.5 * (h0.scatter / static_cast<double>(h0.count - 1) +
                      h1.scatter / static_cast<double>(h1.count - 1));
  const double ridge = shrinkage * a.trace() / static_cast<double>(n);
  a.diagonal().array() += ridge;
  a.triangularView<Eigen::StrictlyUpper>() = a.transpose();

  const VectorXd rhs = h1.mean - h0.mean;
  VectorXd w;
  if (n <= options.direct_solve_limit) {
    Eigen::LLT<MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
      throw IllConditionedCovariance(
          "average covariance is not positive definite; use a positive shrinkage");
    }
    w = llt.solve(rhs);
  } else {
    Eigen::ConjugateGradient<MatrixXd, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(options.residual_tolerance * 0.1);
    cg.setMaxIterations(static_cast<Eigen::Index>(10 * n));
    cg.compute(a);
    w = cg.solve(rhs);
  }

  const double rhs_norm = rhs.norm();
  const double residual = (a * w - rhs).norm();
  if (!w.allFinite() || residual > options.residual_tolerance * rhs_norm) {
    throw IllConditionedCovariance("Hotelling solve residual " + std::to_string(residual) +
                                   " exceeds tolerance; use a larger shrinkage");
  }

  ObserverTemplate t;
  t.w.assign(w.data(), w.data() + w.size());
  t.width = first.width();
  t.height = first.height();
  t.kind = TemplateKind::hotelling;
  t.shrinkage = shrinkage;
  t.training_meta.n_absent = absent.size();
  t.training_meta.n_present = present.size();
  return t;
}

ObserverTemplate estimate_hotelling(const LabeledEnsemble& ensemble, double shrinkage,
                                    const HotellingOptions& options) {
  std::vector<const ImageGrid*> absent, present;
  for (const auto& item : ensemble.items) {
    (item.label == Label::present ? present : absent).push_back(&item.noisy);
  }
  return estimate_hotelling(absent, present, shrinkage, options);
}

ObserverTemplate npw_template(const ImageGrid& signal) {
  if (signal.max_abs() == 0.0) throw InvalidParameter("NPW template needs a non-zero signal");
  return make_template(signal, TemplateKind::npw);
}

double test_statistic(const ObserverTemplate& tmpl, const ImageGrid& image) {
  tmpl.require_compatible(image);
  return dot(tmpl.weights(), image.values());
}

double nll_test_statistic(const ObserverTemplate& tmpl, const ImageGrid& f, double t,
                          const NoiseSpec& noise) {
  const double mean = test_statistic(tmpl, f);
  const double variance = noise.std * noise.std * tmpl.squared_norm();
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw DegenerateVariance("test-statistic variance std^2 ||w||^2 is zero");
  }
  const double r = t - mean;
  return r * r / (2.0 * variance) + 0.5 * std::log(2.0 * std::numbers::pi * variance);
}

}  // namespace taskpls
