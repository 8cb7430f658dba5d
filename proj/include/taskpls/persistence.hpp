#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "taskpls/denoiser.hpp"
#include "taskpls/object_models.hpp"
#include "taskpls/observer.hpp"

namespace taskpls {

inline constexpr int kFormatVersion = 1;

nlohmann::ordered_json to_json(const BackgroundModel& model);
BackgroundModel background_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const SignalSpec& spec);
SignalSpec signal_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const NoiseSpec& spec);
NoiseSpec noise_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const DenoiseConfig& config);
/// Missing keys keep their defaults from `base`.
DenoiseConfig denoise_config_from_json(const nlohmann::json& j, DenoiseConfig base = {});

/// Writes `dir/manifest.json` plus `dir/items/<index>_{noisy,truth}.f64`.
/// Returns the SHA-256 of the manifest, which identifies the ensemble.
std::string save_ensemble(const std::filesystem::path& dir, const LabeledEnsemble& ensemble);

struct LoadedEnsemble {
  LabeledEnsemble ensemble;
  std::string manifest_sha256;
};

/// Reads an ensemble directory. With `verify`, every raster is checked
/// against the hash recorded in the manifest.
LoadedEnsemble load_ensemble(const std::filesystem::path& dir, bool verify = true);

/// Writes the JSON header at `json_path` and the weights next to it
/// (same stem, `.f64`). Returns the SHA-256 of the header.
std::string save_template(const std::filesystem::path& json_path, const ObserverTemplate& tmpl);

ObserverTemplate load_template(const std::filesystem::path& json_path, bool verify = true);

}  // namespace taskpls
