#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "taskpls/denoiser.hpp"
#include "taskpls/errors.hpp"
#include "taskpls/object_models.hpp"
#include "test_support.hpp"

using namespace taskpls;
using taskpls::testing::random_image;
using taskpls::testing::random_template;
using taskpls::testing::unit_template;

namespace {

// Direct transcription of the smoothed TV definition, pixel by pixel.
double brute_force_tv(const ImageGrid& f, double eps) {
  double total = 0.0;
  for (std::size_t r = 0; r < f.height(); ++r) {
    for (std::size_t c = 0; c < f.width(); ++c) {
      double dx = 0.0, dy = 0.0;
      if (c + 1 < f.width()) dx = f.at(r, c + 1) - f.at(r, c);
      if (r + 1 < f.height()) dy = f.at(r + 1, c) - f.at(r, c);
      total += std::sqrt(dx * dx + dy * dy + eps * eps) - eps;
    }
  }
  return total;
}

DenoiseConfig weights(double alpha, double beta, double gamma, double eps = 1e-6) {
  DenoiseConfig c;
  c.alpha = alpha;
  c.beta = beta;
  c.gamma = gamma;
  c.tv_epsilon = eps;
  return c;
}

// Damped Newton on the 1-D (single row) smoothed objective with gamma = 0.
std::vector<double> newton_1d(const std::vector<double>& g, double alpha, double beta,
                              double eps) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::VectorXd f = Eigen::Map<const Eigen::VectorXd>(g.data(), n);
  const Eigen::VectorXd gv = f;
  auto value = [&](const Eigen::VectorXd& x) {
    double v = alpha * (x - gv).squaredNorm();
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const double d = x[i + 1] - x[i];
      v += beta * (std::sqrt(d * d + eps * eps) - eps);
    }
    return v;
  };
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXd grad = 2.0 * alpha * (f - gv);
    Eigen::MatrixXd hess = 2.0 * alpha * Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const double d = f[i + 1] - f[i];
      const double m = std::sqrt(d * d + eps * eps);
      grad[i] -= beta * d / m;
      grad[i + 1] += beta * d / m;
      const double h = beta * eps * eps / (m * m * m);
      hess(i, i) += h;
      hess(i + 1, i + 1) += h;
      hess(i, i + 1) -= h;
      hess(i + 1, i) -= h;
    }
    if (grad.norm() < 1e-13) break;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    double t = 1.0;
    const double f0 = value(f);
    while (value(f - t * step) > f0 - 1e-4 * t * grad.dot(step) && t > 1e-12) t *= 0.5;
    f -= t * step;
  }
  return {f.data(), f.data() + n};
}

}  // namespace

TEST_SUITE("denoiser") {

TEST_CASE("tv seminorm: constant image is exactly zero") {
  ImageGrid c(7, 5);
  for (double& v : c.values()) v = 3.25;
  CHECK(tv_seminorm(c, 1e-6) == 0.0);
  CHECK(tv_seminorm(c, 0.5) == 0.0);
}

TEST_CASE("tv seminorm: vertical unit step") {
  ImageGrid step(4, 4);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 2; c < 4; ++c) step.at(r, c) = 1.0;
  }
  const double eps = 1e-6;
  CHECK(std::abs(tv_seminorm(step, eps) - 4.0) <= eps * 16);
}

TEST_CASE("tv seminorm: matches brute force on random images") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 10; ++k) {
    const auto f = random_image(8, 8, rng);
    for (double eps : {1e-6, 1e-2}) {
      const double a = tv_seminorm(f, eps);
      const double b = brute_force_tv(f, eps);
      CHECK(std::abs(a - b) <= 1e-12 * std::abs(b));
    }
  }
  CHECK_THROWS_AS(tv_seminorm(ImageGrid(2, 2), 0.0), InvalidParameter);
}

TEST_CASE("task penalty") {
  std::mt19937_64 rng(22);
  const auto g = random_image(8, 8, rng);
  const auto w = random_template(8, 8, rng);
  CHECK(task_penalty(g, g, w) == 0.0);

  ImageGrid f = g;
  f[9] += 0.25;
  CHECK(task_penalty(f, g, unit_template(8, 8, 9)) == doctest::Approx(0.0625).epsilon(1e-12));

  for (int k = 0; k < 5; ++k) {
    const auto fk = random_image(8, 8, rng);
    const double d = test_statistic(w, g) - test_statistic(w, fk);
    CHECK(std::abs(task_penalty(fk, g, w) - d * d) <= 1e-12 * d * d);
  }
  CHECK_THROWS_AS(task_penalty(ImageGrid(4, 4), g, w), ShapeError);
}

TEST_CASE("objective") {
  std::mt19937_64 rng(23);
  const auto g = random_image(8, 8, rng);
  const auto w = random_template(8, 8, rng);

  const auto c = weights(0.7, 0.3, 2.0);
  CHECK(objective(g, g, w, c) == doctest::Approx(0.3 * tv_seminorm(g, 1e-6)).epsilon(1e-15));

  ImageGrid f = g;
  f[5] += 0.5;
  CHECK(objective(f, g, w, weights(1, 0, 0)) == doctest::Approx(0.25).epsilon(1e-12));

  for (int k = 0; k < 5; ++k) {
    const auto fk = random_image(8, 8, rng);
    double fid = 0.0;
    for (std::size_t i = 0; i < fk.size(); ++i) fid += (fk[i] - g[i]) * (fk[i] - g[i]);
    const double expected =
        0.7 * fid + 0.3 * brute_force_tv(fk, 1e-6) + 2.0 * task_penalty(fk, g, w);
    CHECK(std::abs(objective(fk, g, w, c) - expected) <= 1e-12 * expected);
  }
  CHECK_THROWS_AS(objective(ImageGrid(8, 4), g, w, c), ShapeError);
}

TEST_CASE("gradient: vanishing cases") {
  std::mt19937_64 rng(24);
  const auto g = random_image(8, 8, rng);
  const auto w = random_template(8, 8, rng);
  CHECK(objective_gradient(g, g, w, weights(1.0, 0.0, 3.0)).max_abs() == 0.0);

  ImageGrid cf(8, 8), cg(8, 8);
  for (double& v : cf.values()) v = 0.4;
  for (double& v : cg.values()) v = -1.1;
  CHECK(objective_gradient(cf, cg, w, weights(0.0, 1.0, 0.0)).max_abs() == 0.0);
}

TEST_CASE("gradient: central finite differences on 20 random instances") {
  std::mt19937_64 rng(25);
  std::uniform_int_distribution<int> pick(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_image(8, 8, rng);
    const auto g = random_image(8, 8, rng);
    const auto w = random_template(8, 8, rng);
    const auto c = weights(pick(rng) ? 0.1 : 1.0, pick(rng) ? 0.1 : 1.0, pick(rng) ? 0.1 : 1.0);
    const ImageGrid grad = objective_gradient(f, g, w, c);
    const double h = 1e-6 * std::max(1.0, f.max_abs());
    for (std::size_t i = 0; i < f.size(); ++i) {
      ImageGrid fp = f, fm = f;
      fp[i] += h;
      fm[i] -= h;
      const double fd = (objective(fp, g, w, c) - objective(fm, g, w, c)) / (2.0 * h);
      CHECK(std::abs(fd - grad[i]) <= 1e-4 * std::max(std::abs(fd), std::abs(grad[i])));
    }
  }
}

TEST_CASE("denoise: beta = 0 returns the input") {
  const ImageGrid g = add_noise(gen_mvn_lumpy(MvnLumpyParams{16, 16}, 3), NoiseSpec{0.01}, 4);
  std::mt19937_64 rng(26);
  const auto w = random_template(16, 16, rng);
  for (double gamma : {0.0, 1.0, 10.0}) {
    auto c = weights(1.0, 0.0, gamma);
    c.iterations = 500;
    const auto r = denoise(g, w, c);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(r.estimate[i] - g[i]));
    CHECK(err <= 1e-6 * g.max_abs());
  }
}

TEST_CASE("denoise: objective decreases on a noisy lumpy image") {
  const ImageGrid g = add_noise(gen_mvn_lumpy(MvnLumpyParams{}, 5), NoiseSpec{0.01}, 6);
  const auto w = npw_template(render_signal({SignalShape::gaussian, 16, 16, 5, 0.02}, 32, 32));
  auto c = weights(1.0, 0.05, 0.0);
  c.iterations = 3000;
  c.trace_stride = 50;
  const auto r = denoise(g, w, c);
  const double initial = objective(g, g, w, c);
  CHECK(r.terms_final.total <= initial);
  CHECK(r.objective_trace.front().iteration == 0);
  CHECK(r.objective_trace.front().terms.total == doctest::Approx(initial).epsilon(1e-14));
  CHECK(r.objective_trace.back().iteration == 3000);
  for (const auto& p : r.objective_trace) CHECK(std::isfinite(p.terms.total));

  const auto recomputed = objective_terms(r.estimate, g, w, c);
  CHECK(std::abs(recomputed.total - r.terms_final.total) <= 1e-10 * recomputed.total);
  CHECK(std::abs(recomputed.tv - r.terms_final.tv) <= 1e-10 * recomputed.tv);
  CHECK(std::abs(recomputed.fidelity - r.terms_final.fidelity) <= 1e-10 * recomputed.fidelity);
}

TEST_CASE("denoise: 1-D instance matches a Newton oracle") {
  const std::vector<double> gv = {0.10, 0.85, 0.80, 0.95, 0.20, 0.25, 0.15, 0.60};
  const ImageGrid g(8, 1, gv);
  const double beta = 0.05, eps = 1e-3;
  const auto oracle = newton_1d(gv, 1.0, beta, eps);

  auto c = weights(1.0, beta, 0.0, eps);
  c.iterations = 20000;
  c.trace_stride = 1000;
  const auto r = denoise(g, make_template(ImageGrid(8, 1, std::vector<double>(8, 1.0))), c);
  for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(r.estimate[i] - oracle[i]) <= 1e-4);
}

TEST_CASE("denoise: task term anchors the test statistic as gamma grows") {
  const ImageGrid truth = gen_binary_texture(BinaryTextureParams{16, 16}, 8) +
                          render_signal({SignalShape::disk, 8, 8, 2, 0.07}, 16, 16);
  const ImageGrid g = add_noise(truth, NoiseSpec{0.1}, 9);
  const auto w = npw_template(render_signal({SignalShape::disk, 8, 8, 2, 0.07}, 16, 16));
  const double tg = test_statistic(w, g);
  double previous = INFINITY;
  for (double gamma : {0.0, 0.01, 0.1, 1.0, 10.0}) {
    auto c = weights(1.0, 0.14, gamma);
    c.iterations = 3000;
    c.trace_stride = 1000;
    const double dev = std::abs(test_statistic(w, denoise(g, w, c).estimate) - tg);
    CHECK(dev <= previous + 1e-3 * std::abs(tg));
    previous = dev;
  }
}

TEST_CASE("denoise: both initializations reach the same objective") {
  // Convex objective, full default iteration budget. The smoothing constant is
  // 1e-3: at 1e-6 the fixed-step optimizer ends in a limit cycle whose
  // objective jitter (~2e-5 relative) exceeds the 1e-6 agreement asked here.
  const ImageGrid g = add_noise(gen_mvn_lumpy(MvnLumpyParams{16, 16}, 10), NoiseSpec{0.01}, 11);
  const auto w = npw_template(render_signal({SignalShape::gaussian, 8, 8, 5, 0.02}, 16, 16));
  auto c = weights(1.0, 0.05, 1.0, 1e-3);
  c.trace_stride = 1000;
  const auto from_g = denoise(g, w, c);
  c.init = InitRule::zeros;
  const auto from_zero = denoise(g, w, c);
  const double a = from_g.terms_final.total;
  const double b = from_zero.terms_final.total;
  CHECK(std::abs(a - b) <= 1e-6 * std::max(a, b));
}

TEST_CASE("denoise: divergence guard names the iteration") {
  std::mt19937_64 rng(27);
  const auto g = random_image(8, 8, rng, 0.0, 1.0);
  auto c = weights(1.0, 0.1, 0.0);
  c.step_size = 1e6;
  c.iterations = 10;
  try {
    denoise(g, random_template(8, 8, rng), c);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.iteration() >= 1);
    CHECK(std::string(e.what()).find("iteration") != std::string::npos);
  }
}

TEST_CASE("denoise: config validation") {
  std::mt19937_64 rng(28);
  const auto g = random_image(4, 4, rng);
  const auto w = random_template(4, 4, rng);
  CHECK_THROWS_AS(denoise(g, w, weights(0, 0, 0)), InvalidParameter);
  CHECK_THROWS_AS(denoise(g, w, weights(-1, 0, 0)), InvalidParameter);
  CHECK_THROWS_AS(denoise(g, w, weights(1, 0, 0, 0.0)), InvalidParameter);
  auto c = weights(1, 1, 1);
  c.iterations = 0;
  CHECK_THROWS_AS(denoise(g, w, c), InvalidParameter);
  c = weights(1, 1, 1);
  c.step_size = 0.0;
  CHECK_THROWS_AS(denoise(g, w, c), InvalidParameter);
  CHECK_THROWS_AS(denoise(g, random_template(5, 4, rng), weights(1, 1, 1)), ShapeError);
}

TEST_CASE("trace csv") {
  std::vector<TracePoint> t = {{0, {1.0, 2.0, 3.0, 4.0}}, {10, {0.5, 1.0, 1.5, 2.0}}};
  const std::string csv = trace_to_csv(t);
  CHECK(csv.rfind("iteration,objective,fidelity,tv,task\n", 0) == 0);
  CHECK(csv.find("0,4,1,2,3\n") != std::string::npos);
  CHECK(csv.find("10,2,0.5,1,1.5\n") != std::string::npos);
}

}  // TEST_SUITE
