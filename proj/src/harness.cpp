#include "taskpls/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "taskpls/errors.hpp"
#include "taskpls/observer.hpp"
#include "taskpls/parallel.hpp"
#include "taskpls/persistence.hpp"
#include "taskpls/raster_io.hpp"
#include "taskpls/seeding.hpp"

namespace taskpls {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kRunManifest = "run_manifest.json";
constexpr const char* kTrainDir = "train";
constexpr const char* kTestDir = "test";
constexpr const char* kTemplateFile = "template.json";
constexpr const char* kTemplateWeights = "template.f64";
constexpr const char* kSweepCsv = "sweep.csv";

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void log(const RunOptions& options, const std::string& message) {
  if (options.verbose) std::cerr << "[taskpls] " << message << '\n';
}

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return out.str();
}

std::vector<double> read_list(const json& j, const char* key, std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_number()) return {v.get<double>()};
  return v.get<std::vector<double>>();
}

std::size_t index_of(const std::vector<double>& values, double v, const char* what) {
  const auto it = std::find(values.begin(), values.end(), v);
  if (it == values.end()) {
    throw InvalidParameter(std::string("render ") + what + " " + format_double(v) +
                           " is not in the sweep grid");
  }
  return static_cast<std::size_t>(it - values.begin());
}

// Opens the run manifest, or starts one when the directory has none yet.
RunManifest open_run(const ExperimentConfig& config, const fs::path& out) {
  RunManifest manifest(out);
  if (manifest.exists()) return RunManifest::load(out);
  manifest.data()["format_version"] = kFormatVersion;
  manifest.data()["config"] = to_json(config);
  return manifest;
}

std::size_t render_item(const ExperimentConfig& config) {
  const std::size_t total = config.test.n_absent + config.test.n_present;
  const std::size_t item = config.render.item.value_or(
      config.test.n_present > 0 ? config.test.n_absent : 0);
  if (item >= total) throw InvalidParameter("render item index outside the test ensemble");
  return item;
}

}  // namespace

void ExperimentConfig::validate() const {
  std::visit([](const auto& p) { p.validate(); }, background);
  signal.validate();
  noise.validate();
  render_signal(signal, background_width(background), background_height(background));
  if (training.n_absent < 1 || training.n_present < 1 || test.n_absent < 1 ||
      test.n_present < 1) {
    throw InvalidParameter("ensemble counts must be >= 1");
  }
  if (grid.alpha.empty() || grid.beta.empty() || grid.gamma.empty()) {
    throw InvalidParameter("denoise grid lists must be non-empty");
  }
  if (!(shrinkage >= 0.0)) throw InvalidParameter("shrinkage must be >= 0");
  for (double a : grid.alpha) {
    for (double b : grid.beta) {
      for (double g : grid.gamma) {
        DenoiseConfig c = solver;
        c.alpha = a;
        c.beta = b;
        c.gamma = g;
        c.validate();
      }
    }
  }
}

ExperimentConfig default_config(const std::string& task) {
  ExperimentConfig c;
  c.solver.iterations = 3000;
  c.solver.step_size = 1e-4;
  c.solver.trace_stride = 100;
  if (task == "mvn_lumpy") {
    c.background = MvnLumpyParams{};
    c.signal = SignalSpec{SignalShape::gaussian, 16.0, 16.0, 5.0, 0.02};
    c.noise = NoiseSpec{0.01};
    c.grid = DenoiseGrid{{1.0}, {0.05}, {0.0, 0.1, 0.5, 1.0}};
    c.output_dir = "runs/mvn_lumpy";
  } else if (task == "binary_texture") {
    c.background = BinaryTextureParams{};
    c.signal = SignalSpec{SignalShape::disk, 16.0, 16.0, 2.0, 0.07};
    c.noise = NoiseSpec{0.1};
    c.grid = DenoiseGrid{{1.0}, {0.01, 0.14, 1.0}, {0.0, 0.1, 1.0, 10.0}};
    c.render.beta = 0.14;
    c.output_dir = "runs/binary_texture";
  } else {
    throw InvalidParameter("unknown task '" + task + "' (expected mvn_lumpy or binary_texture)");
  }
  return c;
}

ordered_json to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["task"] = c.task();
  j["background"] = to_json(c.background);
  j["signal"] = to_json(c.signal);
  j["noise"] = to_json(c.noise);
  j["training"] = {{"n_absent", c.training.n_absent}, {"n_present", c.training.n_present}};
  j["test"] = {{"n_absent", c.test.n_absent}, {"n_present", c.test.n_present}};
  j["shrinkage"] = c.shrinkage;
  j["grid"] = {{"alpha", c.grid.alpha}, {"beta", c.grid.beta}, {"gamma", c.grid.gamma}};
  ordered_json solver = to_json(c.solver);
  for (const char* k : {"alpha", "beta", "gamma"}) solver.erase(k);
  j["solver"] = solver;
  ordered_json render = ordered_json::object();
  if (c.render.item) render["item"] = *c.render.item;
  if (c.render.alpha) render["alpha"] = *c.render.alpha;
  if (c.render.beta) render["beta"] = *c.render.beta;
  j["render"] = render;
  j["master_seed"] = c.master_seed;
  j["output_dir"] = c.output_dir.string();
  j["record_runtime"] = c.record_runtime;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  const int version = j.value("format_version", kFormatVersion);
  if (version != kFormatVersion) {
    throw InvalidParameter("unsupported config format_version " + std::to_string(version));
  }
  ExperimentConfig c = default_config(j.value("task", std::string("mvn_lumpy")));
  try {
    if (j.contains("background")) {
      json bg = j.at("background");
      if (!bg.contains("model")) bg["model"] = c.task();
      c.background = background_from_json(bg);
      if (background_name(c.background) != j.value("task", c.task())) {
        throw InvalidParameter("background model does not match task");
      }
    }
    if (j.contains("signal")) c.signal = signal_from_json(j.at("signal"));
    if (j.contains("noise")) c.noise = noise_from_json(j.at("noise"));
    for (auto [key, counts] : {std::pair{"training", &c.training}, std::pair{"test", &c.test}}) {
      if (!j.contains(key)) continue;
      const auto& n = j.at(key);
      counts->n_absent = n.value("n_absent", counts->n_absent);
      counts->n_present = n.value("n_present", counts->n_present);
    }
    c.shrinkage = j.value("shrinkage", c.shrinkage);
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      c.grid.alpha = read_list(g, "alpha", c.grid.alpha);
      c.grid.beta = read_list(g, "beta", c.grid.beta);
      c.grid.gamma = read_list(g, "gamma", c.grid.gamma);
    }
    if (j.contains("solver")) c.solver = denoise_config_from_json(j.at("solver"), c.solver);
    if (j.contains("render")) {
      const auto& r = j.at("render");
      if (r.contains("item")) c.render.item = r.at("item").get<std::size_t>();
      if (r.contains("alpha")) c.render.alpha = r.at("alpha").get<double>();
      if (r.contains("beta")) c.render.beta = r.at("beta").get<double>();
    }
    c.master_seed = j.value("master_seed", c.master_seed);
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    c.record_runtime = j.value("record_runtime", c.record_runtime);
  } catch (const json::exception& e) {
    throw InvalidParameter(std::string("malformed experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw InvalidParameter("malformed JSON in " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

fs::path resolve_output_dir(const ExperimentConfig& config) {
  const char* root = std::getenv(kOutputRootEnv);
  if (root != nullptr && *root != '\0' && config.output_dir.is_relative()) {
    return fs::path(root) / config.output_dir;
  }
  return config.output_dir;
}

StageSeeds stage_seeds(std::uint64_t master_seed) {
  return {derive_seed(master_seed, 0, "training"), derive_seed(master_seed, 0, "test")};
}

RunManifest::RunManifest(fs::path run_dir) : run_dir_(std::move(run_dir)) {
  data_ = ordered_json::object();
}

RunManifest RunManifest::load(const fs::path& run_dir) {
  RunManifest m(run_dir);
  const fs::path path = run_dir / kRunManifest;
  try {
    m.data_ = ordered_json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
  if (m.data_.value("format_version", 0) != kFormatVersion) {
    throw IoError(path.string() + ": unsupported format_version");
  }
  return m;
}

bool RunManifest::exists() const { return fs::exists(run_dir_ / kRunManifest); }

void RunManifest::save() const { write_text(run_dir_ / kRunManifest, data_.dump(2) + "\n"); }

std::string RunManifest::record_artifact(const std::string& relative) {
  const std::string hash = sha256_file(run_dir_ / relative);
  data_["artifacts"][relative] = hash;
  return hash;
}

void RunManifest::verify_artifacts(const std::vector<std::string>& relatives) const {
  for (const auto& rel : relatives) {
    if (!data_.contains("artifacts") || !data_["artifacts"].contains(rel)) {
      throw IntegrityError("run manifest in " + run_dir_.string() + " has no record of " + rel);
    }
    const fs::path path = run_dir_ / rel;
    if (!fs::exists(path)) throw IntegrityError("missing artifact " + path.string());
    verify_sha256(path, data_["artifacts"][rel].get<std::string>());
  }
}

std::vector<std::string> RunManifest::artifacts_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  if (!data_.contains("artifacts")) return out;
  for (const auto& [key, value] : data_["artifacts"].items()) {
    if (key.rfind(prefix, 0) == 0) out.push_back(key);
  }
  return out;
}

void RunManifest::record_timing(const std::string& stage, double seconds) {
  data_["timing"][stage] = seconds;
}

ExperimentConfig RunManifest::config() const {
  if (!data_.contains("config")) throw IoError("run manifest has no config snapshot");
  return config_from_json(data_.at("config"));
}

GenerateResult cmd_generate(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const Stopwatch clock;
  const fs::path out = resolve_output_dir(config);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out.string());

  // A fresh generate invalidates everything downstream.
  RunManifest manifest(out);
  manifest.data()["format_version"] = kFormatVersion;
  manifest.data()["config"] = to_json(config);
  const StageSeeds seeds = stage_seeds(config.master_seed);
  manifest.data()["seeds"] = {
      {"master", config.master_seed}, {"training", seeds.training}, {"test", seeds.test}};

  GenerateResult result;
  result.training_dir = out / kTrainDir;
  result.test_dir = out / kTestDir;
  const EnsembleOptions ens_options{false, options.jobs};

  log(options, "generating training ensemble");
  fs::remove_all(result.training_dir);
  result.training_manifest_sha256 = save_ensemble(
      result.training_dir,
      make_ensemble(config.background, config.signal, config.noise, config.training.n_absent,
                    config.training.n_present, seeds.training, ens_options));

  log(options, "generating test ensemble");
  fs::remove_all(result.test_dir);
  result.test_manifest_sha256 = save_ensemble(
      result.test_dir, make_ensemble(config.background, config.signal, config.noise,
                                     config.test.n_absent, config.test.n_present, seeds.test,
                                     ens_options));

  manifest.record_artifact(std::string(kTrainDir) + "/manifest.json");
  manifest.record_artifact(std::string(kTestDir) + "/manifest.json");
  manifest.record_timing("generate_s", clock.seconds());
  manifest.save();
  return result;
}

fs::path cmd_template(const ExperimentConfig& config, std::optional<fs::path> ensemble_dir,
                      const RunOptions& options) {
  config.validate();
  const Stopwatch clock;
  const fs::path out = resolve_output_dir(config);
  RunManifest manifest = open_run(config, out);

  if (!ensemble_dir) {
    manifest.verify_artifacts({std::string(kTrainDir) + "/manifest.json"});
    ensemble_dir = out / kTrainDir;
  }
  log(options, "loading training ensemble " + ensemble_dir->string());
  const LoadedEnsemble loaded = load_ensemble(*ensemble_dir, true);

  log(options, "estimating Hotelling template");
  ObserverTemplate tmpl = estimate_hotelling(loaded.ensemble, config.shrinkage);
  tmpl.training_meta.ensemble_id = loaded.manifest_sha256;
  tmpl.training_meta.estimated_at = utc_timestamp();

  const fs::path path = out / kTemplateFile;
  save_template(path, tmpl);
  manifest.record_artifact(kTemplateFile);
  manifest.record_artifact(kTemplateWeights);
  manifest.record_timing("template_s", clock.seconds());
  manifest.save();
  return path;
}

std::string sweep_point_name(std::size_t ia, std::size_t ib, std::size_t ig) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "a%zu_b%zu_g%zu", ia, ib, ig);
  return buf;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, bool record_runtime) {
  std::ostringstream out;
  out << "alpha,beta,gamma,auc,auc_std_err,mean_rmse,runtime_s\n";
  for (const auto& r : rows) {
    if (r.baseline) {
      out << ",,,";
    } else {
      out << format_double(r.alpha) << ',' << format_double(r.beta) << ','
          << format_double(r.gamma) << ',';
    }
    out << format_double(r.auc) << ',' << format_double(r.auc_std_err) << ','
        << format_double(r.mean_rmse) << ',';
    if (record_runtime) {
      std::ostringstream t;
      t << std::fixed << std::setprecision(3) << r.runtime_s;
      out << t.str();
    }
    out << '\n';
  }
  return out.str();
}

std::vector<SweepRow> cmd_sweep(const ExperimentConfig& config,
                                std::optional<fs::path> ensemble_dir,
                                std::optional<fs::path> template_path,
                                const RunOptions& options) {
  config.validate();
  const Stopwatch clock;
  const fs::path out = resolve_output_dir(config);
  RunManifest manifest = open_run(config, out);

  if (!ensemble_dir) {
    manifest.verify_artifacts({std::string(kTestDir) + "/manifest.json"});
    ensemble_dir = out / kTestDir;
  }
  if (!template_path) {
    manifest.verify_artifacts({kTemplateFile, kTemplateWeights});
    template_path = out / kTemplateFile;
  }
  const LabeledEnsemble test = load_ensemble(*ensemble_dir, true).ensemble;
  const ObserverTemplate tmpl = load_template(*template_path, true);
  if (test.items.empty()) throw InsufficientData("test ensemble is empty");
  tmpl.require_compatible(test.items.front().noisy);

  const std::size_t n = test.items.size();
  const std::size_t highlight = render_item(config);

  // Replace artifacts of any earlier sweep.
  for (const char* sub : {"roc", "estimates"}) fs::remove_all(out / sub);
  if (manifest.data().contains("artifacts")) {
    for (const auto& rel : manifest.artifacts_with_prefix("roc/")) {
      manifest.data()["artifacts"].erase(rel);
    }
    for (const auto& rel : manifest.artifacts_with_prefix("estimates/")) {
      manifest.data()["artifacts"].erase(rel);
    }
  }

  auto score_point = [&](const std::vector<double>& scores) {
    ScoreSet set;
    for (std::size_t i = 0; i < n; ++i) {
      (test.items[i].label == Label::present ? set.present_scores : set.absent_scores)
          .push_back(scores[i]);
    }
    return roc_curve(set);
  };
  auto write_roc = [&](const std::string& name, const RocResult& roc) {
    const std::string csv = "roc/" + name + ".csv";
    const std::string summary = "roc/" + name + ".json";
    write_text(out / csv, roc_to_csv(roc));
    write_text(out / summary, roc_summary_json(roc));
    manifest.record_artifact(csv);
    manifest.record_artifact(summary);
  };

  std::vector<SweepRow> rows;
  {
    const Stopwatch point_clock;
    std::vector<double> scores(n), errors(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = test_statistic(tmpl, test.items[i].noisy);
      errors[i] = rmse(test.items[i].noisy, test.items[i].truth);
    }
    const RocResult roc = score_point(scores);
    write_roc("baseline", roc);
    SweepRow row;
    row.baseline = true;
    row.auc = roc.auc;
    row.auc_std_err = roc.auc_std_err;
    for (double e : errors) row.mean_rmse += e;
    row.mean_rmse /= static_cast<double>(n);
    row.runtime_s = point_clock.seconds();
    rows.push_back(row);
  }

  for (std::size_t ia = 0; ia < config.grid.alpha.size(); ++ia) {
    for (std::size_t ib = 0; ib < config.grid.beta.size(); ++ib) {
      for (std::size_t ig = 0; ig < config.grid.gamma.size(); ++ig) {
        DenoiseConfig dc = config.solver;
        dc.alpha = config.grid.alpha[ia];
        dc.beta = config.grid.beta[ib];
        dc.gamma = config.grid.gamma[ig];
        const std::string name = sweep_point_name(ia, ib, ig);
        log(options, "sweep point " + name + " (alpha=" + format_double(dc.alpha) +
                         ", beta=" + format_double(dc.beta) +
                         ", gamma=" + format_double(dc.gamma) + ")");

        const Stopwatch point_clock;
        std::vector<double> scores(n), errors(n);
        ImageGrid highlighted;
        parallel_for(n, options.jobs, [&](std::size_t i) {
          DenoiseResult r;
          try {
            r = denoise(test.items[i].noisy, tmpl, dc);
          } catch (const DivergenceError& e) {
            throw DivergenceError(e.iteration(), "grid point " + name + ", item " +
                                                     std::to_string(i) + ": " + e.what());
          }
          scores[i] = test_statistic(tmpl, r.estimate);
          errors[i] = rmse(r.estimate, test.items[i].truth);
          if (i == highlight) highlighted = std::move(r.estimate);
        });

        const RocResult roc = score_point(scores);
        write_roc(name, roc);
        const std::string est = "estimates/" + name + ".f64";
        write_raster(out / est, highlighted);
        manifest.record_artifact(est);

        SweepRow row;
        row.alpha = dc.alpha;
        row.beta = dc.beta;
        row.gamma = dc.gamma;
        row.auc = roc.auc;
        row.auc_std_err = roc.auc_std_err;
        for (double e : errors) row.mean_rmse += e;
        row.mean_rmse /= static_cast<double>(n);
        row.runtime_s = point_clock.seconds();
        rows.push_back(row);
        log(options, "  auc=" + format_double(row.auc) + " +/- " + format_double(row.auc_std_err));
      }
    }
  }

  write_text(out / kSweepCsv, sweep_csv(rows, config.record_runtime));
  manifest.record_artifact(kSweepCsv);
  manifest.data()["sweep"] = {{"render_item", highlight},
                              {"test_manifest", fs::absolute(*ensemble_dir).string()},
                              {"template", fs::absolute(*template_path).string()}};
  manifest.record_timing("sweep_s", clock.seconds());
  manifest.save();
  return rows;
}

RenderResult cmd_render(const fs::path& run_dir, const RunOptions& options) {
  const Stopwatch clock;
  RunManifest manifest = RunManifest::load(run_dir);
  const ExperimentConfig config = manifest.config();
  if (!manifest.data().contains("sweep")) {
    throw IoError("no completed sweep in " + run_dir.string());
  }

  const std::size_t ia = index_of(config.grid.alpha,
                                  config.render.alpha.value_or(config.grid.alpha.front()), "alpha");
  const std::size_t ib =
      index_of(config.grid.beta, config.render.beta.value_or(config.grid.beta.front()), "beta");
  const std::size_t reference = index_of(config.grid.gamma, 0.0, "gamma");

  std::vector<std::string> upstream = {kSweepCsv};
  for (std::size_t ig = 0; ig < config.grid.gamma.size(); ++ig) {
    upstream.push_back("estimates/" + sweep_point_name(ia, ib, ig) + ".f64");
  }
  manifest.verify_artifacts(upstream);

  const std::size_t item = manifest.data()["sweep"]["render_item"].get<std::size_t>();
  const fs::path test_dir = manifest.data()["sweep"]["test_manifest"].get<std::string>();
  log(options, "rendering item " + std::to_string(item));
  const LabeledEnsemble test = load_ensemble(test_dir, true).ensemble;
  if (item >= test.items.size()) throw IoError("render item missing from test ensemble");
  const EnsembleItem& chosen = test.items[item];
  const std::size_t w = chosen.noisy.width();
  const std::size_t h = chosen.noisy.height();

  std::vector<ImageGrid> estimates;
  for (std::size_t ig = 0; ig < config.grid.gamma.size(); ++ig) {
    estimates.push_back(
        read_raster(run_dir / ("estimates/" + sweep_point_name(ia, ib, ig) + ".f64"), w, h));
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  auto extend = [&](const ImageGrid& g) {
    for (double v : g.values()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  };
  extend(chosen.truth);
  extend(chosen.noisy);
  for (const auto& e : estimates) extend(e);
  if (!(hi > lo)) hi = lo + 1.0;

  std::vector<ImageGrid> diffs;
  double diff_max = 0.0;
  for (const auto& e : estimates) {
    diffs.push_back(difference_map(e, estimates[reference]));
    diff_max = std::max(diff_max, diffs.back().max_abs());
  }
  if (diff_max == 0.0) diff_max = 1.0;

  fs::remove_all(run_dir / "render");
  RenderResult result;
  ordered_json panels = ordered_json::array();
  auto emit_panel = [&](const std::string& name, const ImageGrid& g, const std::string& role) {
    const std::string rel = "render/" + name + ".png";
    write_png(run_dir / rel, g, lo, hi);
    manifest.record_artifact(rel);
    result.panels.push_back(run_dir / rel);
    panels.push_back({{"file", rel}, {"role", role}});
  };
  emit_panel("truth", chosen.truth, "ground truth");
  emit_panel("noisy", chosen.noisy, "noisy input");
  for (std::size_t ig = 0; ig < estimates.size(); ++ig) {
    emit_panel("gamma_" + std::to_string(ig), estimates[ig],
               "denoised, gamma=" + format_double(config.grid.gamma[ig]));
  }

  ordered_json diff_entries = ordered_json::array();
  for (std::size_t ig = 0; ig < diffs.size(); ++ig) {
    const std::string stem = "render/diff_gamma_" + std::to_string(ig);
    write_png(run_dir / (stem + ".png"), diffs[ig], -diff_max, diff_max);
    write_raster(run_dir / (stem + ".f64"), diffs[ig]);
    manifest.record_artifact(stem + ".png");
    manifest.record_artifact(stem + ".f64");
    result.difference_maps.push_back(run_dir / (stem + ".png"));
    diff_entries.push_back({{"file", stem + ".png"},
                            {"raster", stem + ".f64"},
                            {"gamma", config.grid.gamma[ig]},
                            {"reference_gamma", 0.0}});
  }

  ordered_json render;
  render["item"] = item;
  render["alpha"] = config.grid.alpha[ia];
  render["beta"] = config.grid.beta[ib];
  render["width"] = w;
  render["height"] = h;
  render["panel_window"] = {{"min", lo}, {"max", hi}};
  render["difference_window"] = {{"min", -diff_max}, {"max", diff_max}};
  render["panels"] = panels;
  render["difference_maps"] = diff_entries;
  write_text(run_dir / "render/render_manifest.json", render.dump(2) + "\n");
  manifest.record_artifact("render/render_manifest.json");
  manifest.data()["render"] = render;
  manifest.record_timing("render_s", clock.seconds());
  manifest.save();
  return result;
}

void run_pipeline(const ExperimentConfig& config, const RunOptions& options) {
  cmd_generate(config, options);
  cmd_template(config, {}, options);
  cmd_sweep(config, {}, {}, options);
  cmd_render(resolve_output_dir(config), options);
}

}  // namespace taskpls
