// taskpls: command-line driver for dataset generation, template estimation,
// task-regularized denoising sweeps and rendering.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "taskpls/denoiser.hpp"
#include "taskpls/errors.hpp"
#include "taskpls/evaluation.hpp"
#include "taskpls/harness.hpp"
#include "taskpls/observer.hpp"
#include "taskpls/persistence.hpp"
#include "taskpls/raster_io.hpp"

namespace fs = std::filesystem;
using namespace taskpls;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string task = "mvn_lumpy";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  std::size_t jobs = 1;
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "Experiment config (JSON)");
  cmd->add_option("--task", f.task, "Default config when --config is absent")
      ->check(CLI::IsMember({"mvn_lumpy", "binary_texture"}));
  cmd->add_option("--seed", f.seed, "Override the master seed");
  cmd->add_option("--output", f.output, "Override the output directory");
  cmd->add_option("--jobs,-j", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--verbose,-v", f.verbose, "Progress on stderr");
}

ExperimentConfig resolve_config(const CommonFlags& f) {
  ExperimentConfig c = f.config_path.empty() ? default_config(f.task) : load_config(f.config_path);
  if (f.seed) c.master_seed = *f.seed;
  if (f.output) c.output_dir = *f.output;
  c.validate();
  return c;
}

RunOptions run_options(const CommonFlags& f) { return {f.jobs, f.verbose}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task-based regularized PLS-TV denoising experiments"};
  app.require_subcommand(1);

  CommonFlags common;

  auto* init = app.add_subcommand("init-config", "Print a default experiment config");
  init->add_option("--task", common.task)->check(CLI::IsMember({"mvn_lumpy", "binary_texture"}));

  auto* generate = app.add_subcommand("generate", "Write training and test ensembles");
  add_common(generate, common);

  std::optional<std::string> ensemble_dir, template_path;
  auto* tmpl_cmd = app.add_subcommand("template", "Estimate the Hotelling template");
  add_common(tmpl_cmd, common);
  tmpl_cmd->add_option("--ensemble", ensemble_dir, "Training ensemble directory");

  auto* sweep = app.add_subcommand("sweep", "Denoise the test ensemble over the parameter grid");
  add_common(sweep, common);
  sweep->add_option("--ensemble", ensemble_dir, "Test ensemble directory");
  sweep->add_option("--template", template_path, "Template JSON");

  std::string run_dir;
  auto* render = app.add_subcommand("render", "PNG panels and difference maps of a sweep");
  render->add_option("--run", run_dir, "Run directory")->required();
  render->add_flag("--verbose,-v", common.verbose);

  auto* pipeline = app.add_subcommand("pipeline", "generate, template, sweep and render");
  add_common(pipeline, common);

  // Single-image denoising.
  std::optional<std::string> input_raster;
  std::optional<std::size_t> item_index;
  std::optional<double> alpha, beta, gamma;
  std::optional<std::size_t> iterations;
  std::string out_raster = "denoised.f64";
  std::optional<std::string> trace_csv;
  auto* den = app.add_subcommand("denoise", "Denoise a single image");
  add_common(den, common);
  den->add_option("--template", template_path, "Template JSON")->required();
  den->add_option("--input", input_raster, "Raster (float64, template dimensions)");
  den->add_option("--ensemble", ensemble_dir, "Ensemble directory (with --item)");
  den->add_option("--item", item_index, "Item index in --ensemble");
  den->add_option("--alpha", alpha);
  den->add_option("--beta", beta);
  den->add_option("--gamma", gamma);
  den->add_option("--iterations", iterations);
  den->add_option("--out", out_raster, "Output raster");
  den->add_option("--trace", trace_csv, "Objective trace CSV");

  std::string eval_prefix = "roc";
  bool eval_denoise = false;
  auto* eval = app.add_subcommand("evaluate", "ROC/AUC of a template on an ensemble");
  add_common(eval, common);
  eval->add_option("--ensemble", ensemble_dir, "Ensemble directory")->required();
  eval->add_option("--template", template_path, "Template JSON")->required();
  eval->add_flag("--denoise", eval_denoise, "Denoise each image first");
  eval->add_option("--alpha", alpha);
  eval->add_option("--beta", beta);
  eval->add_option("--gamma", gamma);
  eval->add_option("--iterations", iterations);
  eval->add_option("--prefix", eval_prefix, "Writes <prefix>.csv and <prefix>.json");

  CLI11_PARSE(app, argc, argv);

  try {
    if (init->parsed()) {
      std::cout << to_json(default_config(common.task)).dump(2) << '\n';
    } else if (generate->parsed()) {
      const auto r = cmd_generate(resolve_config(common), run_options(common));
      std::cout << r.training_dir.string() << '\n' << r.test_dir.string() << '\n';
    } else if (tmpl_cmd->parsed()) {
      std::optional<fs::path> dir;
      if (ensemble_dir) dir = *ensemble_dir;
      std::cout << cmd_template(resolve_config(common), dir, run_options(common)).string() << '\n';
    } else if (sweep->parsed()) {
      std::optional<fs::path> dir, tp;
      if (ensemble_dir) dir = *ensemble_dir;
      if (template_path) tp = *template_path;
      const ExperimentConfig config = resolve_config(common);
      const auto rows = cmd_sweep(config, dir, tp, run_options(common));
      std::cout << sweep_csv(rows, config.record_runtime);
    } else if (render->parsed()) {
      const auto r = cmd_render(run_dir, run_options(common));
      for (const auto& p : r.panels) std::cout << p.string() << '\n';
      for (const auto& p : r.difference_maps) std::cout << p.string() << '\n';
    } else if (pipeline->parsed()) {
      const ExperimentConfig config = resolve_config(common);
      run_pipeline(config, run_options(common));
      std::cout << read_text(resolve_output_dir(config) / "sweep.csv");
    } else if (den->parsed()) {
      const ExperimentConfig config = resolve_config(common);
      const ObserverTemplate tmpl = load_template(*template_path);
      ImageGrid g;
      if (input_raster) {
        g = read_raster(*input_raster, tmpl.width, tmpl.height);
      } else if (ensemble_dir && item_index) {
        const auto loaded = load_ensemble(*ensemble_dir);
        if (*item_index >= loaded.ensemble.items.size()) {
          throw InvalidParameter("--item outside the ensemble");
        }
        g = loaded.ensemble.items[*item_index].noisy;
      } else {
        throw InvalidParameter("denoise needs --input or --ensemble with --item");
      }
      DenoiseConfig dc = config.solver;
      dc.alpha = alpha.value_or(config.grid.alpha.front());
      dc.beta = beta.value_or(config.grid.beta.front());
      dc.gamma = gamma.value_or(config.grid.gamma.front());
      if (iterations) dc.iterations = *iterations;
      const DenoiseResult r = denoise(g, tmpl, dc);
      write_raster(out_raster, r.estimate);
      if (trace_csv) write_text(*trace_csv, trace_to_csv(r.objective_trace));
      std::cout << "objective " << r.terms_final.total << " (fidelity " << r.terms_final.fidelity
                << ", tv " << r.terms_final.tv << ", task " << r.terms_final.task << ")\n";
    } else if (eval->parsed()) {
      const ExperimentConfig config = resolve_config(common);
      const auto loaded = load_ensemble(*ensemble_dir);
      const ObserverTemplate tmpl = load_template(*template_path);
      std::optional<DenoiseConfig> dc;
      if (eval_denoise) {
        dc = config.solver;
        dc->alpha = alpha.value_or(config.grid.alpha.front());
        dc->beta = beta.value_or(config.grid.beta.front());
        dc->gamma = gamma.value_or(config.grid.gamma.front());
        if (iterations) dc->iterations = *iterations;
      }
      const RocResult roc = evaluate_pipeline(loaded.ensemble, tmpl, dc, {common.jobs});
      write_text(eval_prefix + ".csv", roc_to_csv(roc));
      write_text(eval_prefix + ".json", roc_summary_json(roc));
      std::cout << roc_summary_json(roc);
    }
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
