#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "taskpls/image_grid.hpp"

namespace taskpls {

/// Stationary multivariate-normal ("type-2 lumpy") background: white noise
/// circularly filtered by an isotropic Gaussian kernel, rescaled to a fixed
/// marginal standard deviation and offset.
struct MvnLumpyParams {
  std::size_t width = 32;
  std::size_t height = 32;
  double dc_offset = 0.1;
  double kernel_std = 6.0;  // pixels
  double field_std = 0.03;

  void validate() const;
  bool operator==(const MvnLumpyParams&) const = default;
};

/// Binary texture background: 1/f^p Gaussian field, standardized, pushed
/// through a sigmoid and mapped onto [low_level, high_level].
struct BinaryTextureParams {
  std::size_t width = 32;
  std::size_t height = 32;
  double spectral_exponent = 2.0;
  double sigmoid_center = 0.0;
  double sigmoid_steepness = 5.0;
  double low_level = 0.0;
  double high_level = 1.0;

  void validate() const;
  bool operator==(const BinaryTextureParams&) const = default;
};

using BackgroundModel = std::variant<MvnLumpyParams, BinaryTextureParams>;

std::size_t background_width(const BackgroundModel& model);
std::size_t background_height(const BackgroundModel& model);
std::string background_name(const BackgroundModel& model);

enum class SignalShape { gaussian, disk };

struct SignalSpec {
  SignalShape shape = SignalShape::gaussian;
  double center_row = 16.0;
  double center_col = 16.0;
  double scale = 5.0;  // std (gaussian) or radius (disk), pixels
  double amplitude = 0.02;

  void validate() const;
  bool operator==(const SignalSpec&) const = default;
};

struct NoiseSpec {
  double std = 0.01;

  void validate() const;
  bool operator==(const NoiseSpec&) const = default;
};

enum class Label : std::uint8_t { absent = 0, present = 1 };

inline const char* label_name(Label l) { return l == Label::present ? "H1" : "H0"; }

struct EnsembleItem {
  ImageGrid noisy;
  ImageGrid truth;
  Label label = Label::absent;
  std::uint64_t background_seed = 0;
  std::uint64_t noise_seed = 0;
};

struct EnsembleProvenance {
  BackgroundModel background;
  SignalSpec signal;
  NoiseSpec noise;
  std::uint64_t master_seed = 0;
  bool paired_backgrounds = false;
};

/// Items are stored H0 first, then H1.
struct LabeledEnsemble {
  std::vector<EnsembleItem> items;
  EnsembleProvenance provenance;

  std::size_t count(Label label) const;
  std::size_t width() const;
  std::size_t height() const;
};

ImageGrid gen_mvn_lumpy(const MvnLumpyParams& params, std::uint64_t seed);

ImageGrid gen_binary_texture(const BinaryTextureParams& params, std::uint64_t seed);

ImageGrid gen_background(const BackgroundModel& model, std::uint64_t seed);

/// Pixel centres sit at integer (row, col). The disk has no partial-volume
/// weighting: a pixel is inside when its centre is within the radius.
ImageGrid render_signal(const SignalSpec& spec, std::size_t width, std::size_t height);

/// image + i.i.d. N(0, std^2). std == 0 returns the input unchanged.
ImageGrid add_noise(const ImageGrid& image, const NoiseSpec& spec, std::uint64_t seed);

struct EnsembleOptions {
  /// H1 item i reuses the background seed of H0 item i (paired design).
  bool paired_backgrounds = false;
  std::size_t jobs = 1;
};

/// Per-item seeds are derive_seed(master_seed, item index, role) with roles
/// "background" and "noise"; results do not depend on `options.jobs`.
LabeledEnsemble make_ensemble(const BackgroundModel& background, const SignalSpec& signal,
                              const NoiseSpec& noise, std::size_t n_absent,
                              std::size_t n_present, std::uint64_t master_seed,
                              const EnsembleOptions& options = {});

}  // namespace taskpls
