// Python bindings. Images cross the boundary as 2-D float64 numpy arrays of
// shape (height, width), row-major.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <string>
#include <vector>

#include "taskpls/denoiser.hpp"
#include "taskpls/errors.hpp"
#include "taskpls/evaluation.hpp"
#include "taskpls/harness.hpp"
#include "taskpls/object_models.hpp"
#include "taskpls/observer.hpp"
#include "taskpls/persistence.hpp"

namespace py = pybind11;
using namespace taskpls;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

ImageGrid to_grid(const Array& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-D array (height, width)");
  const auto h = static_cast<std::size_t>(a.shape(0));
  const auto w = static_cast<std::size_t>(a.shape(1));
  return ImageGrid(w, h, std::vector<double>(a.data(), a.data() + w * h));
}

Array to_array(const ImageGrid& g) {
  Array out({g.height(), g.width()});
  std::memcpy(out.mutable_data(), g.values().data(), g.size() * sizeof(double));
  return out;
}

std::vector<ImageGrid> to_stack(const Array& a) {
  if (a.ndim() != 3) throw ShapeError("expected a 3-D array (count, height, width)");
  const auto n = static_cast<std::size_t>(a.shape(0));
  const auto h = static_cast<std::size_t>(a.shape(1));
  const auto w = static_cast<std::size_t>(a.shape(2));
  std::vector<ImageGrid> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double* p = a.data() + k * w * h;
    out.emplace_back(w, h, std::vector<double>(p, p + w * h));
  }
  return out;
}

ObserverTemplate to_template(const Array& w) { return make_template(to_grid(w)); }

DenoiseConfig make_config(double alpha, double beta, double gamma, std::size_t iterations,
                          double step_size, double tv_epsilon, const std::string& init) {
  DenoiseConfig c;
  c.alpha = alpha;
  c.beta = beta;
  c.gamma = gamma;
  c.iterations = iterations;
  c.step_size = step_size;
  c.tv_epsilon = tv_epsilon;
  c.init = parse_init_rule(init);
  c.trace_stride = std::max<std::size_t>(1, iterations / 100);
  return c;
}

SignalSpec make_signal(const std::string& shape, double center_row, double center_col,
                       double scale, double amplitude) {
  SignalSpec s;
  if (shape == "gaussian") {
    s.shape = SignalShape::gaussian;
  } else if (shape == "disk") {
    s.shape = SignalShape::disk;
  } else {
    throw InvalidParameter("unknown signal shape '" + shape + "'");
  }
  s.center_row = center_row;
  s.center_col = center_col;
  s.scale = scale;
  s.amplitude = amplitude;
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Task-based penalized-least-squares TV denoising";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidParameter>(m, "InvalidParameter", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<IllConditionedCovariance>(m, "IllConditionedCovariance", base.ptr());
  py::register_exception<DegenerateVariance>(m, "DegenerateVariance", base.ptr());
  py::register_exception<InsufficientData>(m, "InsufficientData", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<IntegrityError>(m, "IntegrityError", base.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());

  // object models
  m.def(
      "gen_mvn_lumpy",
      [](std::size_t width, std::size_t height, double dc_offset, double kernel_std,
         double field_std, std::uint64_t seed) {
        return to_array(gen_mvn_lumpy({width, height, dc_offset, kernel_std, field_std}, seed));
      },
      py::arg("width") = 32, py::arg("height") = 32, py::arg("dc_offset") = 0.1,
      py::arg("kernel_std") = 6.0, py::arg("field_std") = 0.03, py::arg("seed") = 0);
  m.def(
      "gen_binary_texture",
      [](std::size_t width, std::size_t height, double spectral_exponent, double sigmoid_center,
         double sigmoid_steepness, double low_level, double high_level, std::uint64_t seed) {
        return to_array(gen_binary_texture({width, height, spectral_exponent, sigmoid_center,
                                            sigmoid_steepness, low_level, high_level},
                                           seed));
      },
      py::arg("width") = 32, py::arg("height") = 32, py::arg("spectral_exponent") = 2.0,
      py::arg("sigmoid_center") = 0.0, py::arg("sigmoid_steepness") = 5.0,
      py::arg("low_level") = 0.0, py::arg("high_level") = 1.0, py::arg("seed") = 0);
  m.def(
      "render_signal",
      [](const std::string& shape, double center_row, double center_col, double scale,
         double amplitude, std::size_t width, std::size_t height) {
        return to_array(
            render_signal(make_signal(shape, center_row, center_col, scale, amplitude), width,
                          height));
      },
      py::arg("shape"), py::arg("center_row"), py::arg("center_col"), py::arg("scale"),
      py::arg("amplitude"), py::arg("width") = 32, py::arg("height") = 32);
  m.def(
      "add_noise",
      [](const Array& image, double std, std::uint64_t seed) {
        return to_array(add_noise(to_grid(image), NoiseSpec{std}, seed));
      },
      py::arg("image"), py::arg("std"), py::arg("seed"));

  // observer
  m.def(
      "hotelling_template",
      [](const Array& absent, const Array& present, double shrinkage) {
        const auto a = to_stack(absent);
        const auto p = to_stack(present);
        std::vector<const ImageGrid*> ap, pp;
        for (const auto& g : a) ap.push_back(&g);
        for (const auto& g : p) pp.push_back(&g);
        const ObserverTemplate t = estimate_hotelling(ap, pp, shrinkage);
        return to_array(ImageGrid(t.width, t.height, t.w));
      },
      py::arg("absent"), py::arg("present"), py::arg("shrinkage") = 1e-3,
      "Hotelling template from stacks of signal-absent and signal-present images.");
  m.def(
      "test_statistic",
      [](const Array& w, const Array& image) {
        return test_statistic(to_template(w), to_grid(image));
      },
      py::arg("template"), py::arg("image"));

  // denoiser
  m.def(
      "tv_seminorm",
      [](const Array& image, double epsilon) { return tv_seminorm(to_grid(image), epsilon); },
      py::arg("image"), py::arg("epsilon") = 1e-6);
  m.def(
      "objective",
      [](const Array& f, const Array& g, const Array& w, double alpha, double beta, double gamma,
         double tv_epsilon) {
        return objective(to_grid(f), to_grid(g), to_template(w),
                         make_config(alpha, beta, gamma, 1, 1e-4, tv_epsilon, "noisy_input"));
      },
      py::arg("f"), py::arg("g"), py::arg("template"), py::arg("alpha") = 1.0,
      py::arg("beta") = 0.05, py::arg("gamma") = 0.0, py::arg("tv_epsilon") = 1e-6);
  m.def(
      "objective_gradient",
      [](const Array& f, const Array& g, const Array& w, double alpha, double beta, double gamma,
         double tv_epsilon) {
        return to_array(
            objective_gradient(to_grid(f), to_grid(g), to_template(w),
                               make_config(alpha, beta, gamma, 1, 1e-4, tv_epsilon, "noisy_input")));
      },
      py::arg("f"), py::arg("g"), py::arg("template"), py::arg("alpha") = 1.0,
      py::arg("beta") = 0.05, py::arg("gamma") = 0.0, py::arg("tv_epsilon") = 1e-6);
  m.def(
      "denoise",
      [](const Array& g, const Array& w, double alpha, double beta, double gamma,
         std::size_t iterations, double step_size, double tv_epsilon, const std::string& init) {
        const auto config = make_config(alpha, beta, gamma, iterations, step_size, tv_epsilon, init);
        const ImageGrid gi = to_grid(g);
        const ObserverTemplate t = to_template(w);
        DenoiseResult r;
        {
          py::gil_scoped_release release;
          r = denoise(gi, t, config);
        }
        std::vector<std::pair<std::size_t, double>> trace;
        for (const auto& p : r.objective_trace) trace.emplace_back(p.iteration, p.terms.total);
        return py::make_tuple(to_array(r.estimate), trace);
      },
      py::arg("g"), py::arg("template"), py::arg("alpha") = 1.0, py::arg("beta") = 0.05,
      py::arg("gamma") = 0.0, py::arg("iterations") = 10000, py::arg("step_size") = 1e-4,
      py::arg("tv_epsilon") = 1e-6, py::arg("init") = "noisy_input",
      "Returns (estimate, [(iteration, objective), ...]).");

  // evaluation
  m.def(
      "roc",
      [](const std::vector<double>& absent, const std::vector<double>& present) {
        const RocResult r = roc_curve({absent, present});
        std::vector<double> fpr, tpr;
        for (const auto& p : r.operating_points) {
          fpr.push_back(p.fpr);
          tpr.push_back(p.tpr);
        }
        py::dict d;
        d["auc"] = r.auc;
        d["auc_std_err"] = r.auc_std_err;
        d["fpr"] = fpr;
        d["tpr"] = tpr;
        return d;
      },
      py::arg("absent_scores"), py::arg("present_scores"));

  // harness
  m.def(
      "default_config",
      [](const std::string& task) { return to_json(default_config(task)).dump(); },
      py::arg("task") = "mvn_lumpy", "Default experiment config as a JSON string.");
  m.def(
      "run_pipeline",
      [](const std::string& config_json, std::size_t jobs) {
        const ExperimentConfig c = config_from_json(nlohmann::json::parse(config_json));
        py::gil_scoped_release release;
        run_pipeline(c, {jobs, false});
      },
      py::arg("config_json"), py::arg("jobs") = 1,
      "Runs generate, template, sweep and render for a JSON experiment config.");
}
