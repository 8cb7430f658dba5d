#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "taskpls/denoiser.hpp"
#include "taskpls/evaluation.hpp"
#include "taskpls/object_models.hpp"

namespace taskpls {

/// Environment variable that, when set, roots relative output directories.
inline constexpr const char* kOutputRootEnv = "TASKPLS_OUTPUT_ROOT";

struct EnsembleCounts {
  std::size_t n_absent = 0;
  std::size_t n_present = 0;
};

struct DenoiseGrid {
  std::vector<double> alpha{1.0};
  std::vector<double> beta{0.05};
  std::vector<double> gamma{0.0};
};

struct RenderSettings {
  /// Test-ensemble item to render; defaults to the first signal-present item.
  std::optional<std::size_t> item;
  /// Grid point whose gamma sweep is rendered; defaults to the first entry of
  /// each list.
  std::optional<double> alpha;
  std::optional<double> beta;
};

struct ExperimentConfig {
  BackgroundModel background = MvnLumpyParams{};
  SignalSpec signal;
  NoiseSpec noise;
  EnsembleCounts training{2000, 2000};
  EnsembleCounts test{400, 400};
  double shrinkage = 1e-3;
  DenoiseGrid grid;
  /// Solver settings; alpha/beta/gamma are taken from the grid.
  DenoiseConfig solver;
  RenderSettings render;
  std::uint64_t master_seed = 20231;
  std::filesystem::path output_dir = "runs/default";
  /// Wall-clock runtimes vary between runs; when false the runtime_s column
  /// is left empty so sweep CSVs are reproducible byte for byte.
  bool record_runtime = true;

  std::string task() const { return background_name(background); }
  void validate() const;
};

/// Desk-scale defaults for "mvn_lumpy" or "binary_texture".
ExperimentConfig default_config(const std::string& task);

nlohmann::ordered_json to_json(const ExperimentConfig& config);
/// Keys absent from `j` take the defaults of the task named by j["task"].
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// output_dir, rooted at $TASKPLS_OUTPUT_ROOT when that is set and
/// output_dir is relative.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

struct StageSeeds {
  std::uint64_t training = 0;
  std::uint64_t test = 0;
};

StageSeeds stage_seeds(std::uint64_t master_seed);

struct RunOptions {
  std::size_t jobs = 1;
  bool verbose = false;
};

/// Per-run bookkeeping stored as run_manifest.json in the output directory.
class RunManifest {
 public:
  explicit RunManifest(std::filesystem::path run_dir);

  static RunManifest load(const std::filesystem::path& run_dir);
  bool exists() const;
  void save() const;

  const std::filesystem::path& run_dir() const { return run_dir_; }
  nlohmann::ordered_json& data() { return data_; }
  const nlohmann::ordered_json& data() const { return data_; }

  /// Hashes `relative` (under the run directory) and records it.
  std::string record_artifact(const std::string& relative);
  /// Throws IntegrityError when any listed artifact is missing or differs.
  void verify_artifacts(const std::vector<std::string>& relatives) const;
  /// Every artifact recorded under `prefix`.
  std::vector<std::string> artifacts_with_prefix(const std::string& prefix) const;
  void record_timing(const std::string& stage, double seconds);

  ExperimentConfig config() const;

 private:
  std::filesystem::path run_dir_;
  nlohmann::ordered_json data_;
};

struct GenerateResult {
  std::filesystem::path training_dir;
  std::filesystem::path test_dir;
  std::string training_manifest_sha256;
  std::string test_manifest_sha256;
};

/// Writes <out>/train and <out>/test ensembles and starts run_manifest.json.
GenerateResult cmd_generate(const ExperimentConfig& config, const RunOptions& options = {});

/// Estimates the Hotelling template from the training ensemble (default
/// <out>/train) and writes <out>/template.json.
std::filesystem::path cmd_template(const ExperimentConfig& config,
                                   std::optional<std::filesystem::path> ensemble_dir = {},
                                   const RunOptions& options = {});

struct SweepRow {
  bool baseline = false;  // raw noisy images, no denoising
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double auc = 0.0;
  double auc_std_err = 0.0;
  double mean_rmse = 0.0;
  double runtime_s = 0.0;
};

/// Denoises every test image at every (alpha, beta, gamma) grid point and
/// writes <out>/sweep.csv (baseline row first) plus ROC exports under
/// <out>/roc and render-item estimates under <out>/estimates.
std::vector<SweepRow> cmd_sweep(const ExperimentConfig& config,
                                std::optional<std::filesystem::path> ensemble_dir = {},
                                std::optional<std::filesystem::path> template_path = {},
                                const RunOptions& options = {});

struct RenderResult {
  std::vector<std::filesystem::path> panels;
  std::vector<std::filesystem::path> difference_maps;
};

/// PNG panels (truth, noisy, one per gamma) and difference maps against the
/// gamma = 0 estimate, for a completed sweep in `run_dir`.
RenderResult cmd_render(const std::filesystem::path& run_dir, const RunOptions& options = {});

std::string sweep_csv(const std::vector<SweepRow>& rows, bool record_runtime);

std::string sweep_point_name(std::size_t ia, std::size_t ib, std::size_t ig);

/// generate, template, sweep and render in sequence.
void run_pipeline(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace taskpls
