#include "taskpls/object_models.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>

#include "taskpls/errors.hpp"
#include "taskpls/parallel.hpp"
#include "taskpls/seeding.hpp"

namespace taskpls {

namespace {

// The FFTW planner is not reentrant; execution on distinct arrays is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter>;

template <typename T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

class FftwPlan {
 public:
  explicit FftwPlan(fftw_plan plan) : plan_(plan) {
    if (plan_ == nullptr) throw Error("FFTW failed to create a plan");
  }
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
  ~FftwPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

// Signed spatial frequency (cycles/pixel) of DFT bin k on an n-point axis.
double signed_frequency(std::size_t k, std::size_t n) {
  const auto ki = static_cast<double>(k);
  const auto ni = static_cast<double>(n);
  return (2 * k <= n ? ki : ki - ni) / ni;
}

// Filters unit white noise by a real isotropic transfer function and returns
// the field scaled to unit marginal variance. `transfer` maps radial
// frequency |f| (cycles/pixel) to gain.
template <typename Transfer>
std::vector<double> filtered_white_noise(std::size_t width, std::size_t height,
                                         std::uint64_t seed, Transfer&& transfer) {
  const std::size_t n = width * height;
  const std::size_t half_w = width / 2 + 1;

  auto real = fftw_buffer<double>(n);
  auto spectrum = fftw_buffer<fftw_complex>(height * half_w);

  std::unique_ptr<FftwPlan> forward, backward;
  {
    std::lock_guard lock(fftw_planner_mutex());
    const int h = static_cast<int>(height);
    const int w = static_cast<int>(width);
    forward = std::make_unique<FftwPlan>(
        fftw_plan_dft_r2c_2d(h, w, real.get(), spectrum.get(), FFTW_ESTIMATE));
    backward = std::make_unique<FftwPlan>(
        fftw_plan_dft_c2r_2d(h, w, spectrum.get(), real.get(), FFTW_ESTIMATE));
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) real[i] = normal(rng);

  forward->execute();

  // Marginal variance of the filtered field is mean |H|^2 over the full
  // spectrum; gather it while shaping the half spectrum.
  double power = 0.0;
  for (std::size_t r = 0; r < height; ++r) {
    const double fy = signed_frequency(r, height);
    for (std::size_t c = 0; c < width; ++c) {
      const double fx = signed_frequency(c, width);
      const double gain = transfer(std::hypot(fx, fy));
      power += gain * gain;
      if (c < half_w) {
        fftw_complex& z = spectrum[r * half_w + c];
        z[0] *= gain;
        z[1] *= gain;
      }
    }
  }
  power /= static_cast<double>(n);
  if (!(power > 0.0)) {
    throw InvalidParameter("background transfer function has no power on this grid");
  }

  backward->execute();

  const double scale = 1.0 / (static_cast<double>(n) * std::sqrt(power));
  std::vector<double> field(n);
  for (std::size_t i = 0; i < n; ++i) field[i] = real[i] * scale;
  return field;
}

}  // namespace

void MvnLumpyParams::validate() const {
  if (width == 0 || height == 0) throw InvalidParameter("MVN lumpy: dimensions must be positive");
  if (!(kernel_std > 0.0)) throw InvalidParameter("MVN lumpy: kernel_std must be > 0");
  if (!(field_std > 0.0)) throw InvalidParameter("MVN lumpy: field_std must be > 0");
  if (!std::isfinite(dc_offset)) throw InvalidParameter("MVN lumpy: dc_offset must be finite");
}

void BinaryTextureParams::validate() const {
  if (width == 0 || height == 0) {
    throw InvalidParameter("binary texture: dimensions must be positive");
  }
  if (!(sigmoid_steepness > 0.0)) {
    throw InvalidParameter("binary texture: sigmoid_steepness must be > 0");
  }
  if (!(low_level < high_level)) {
    throw InvalidParameter("binary texture: low_level must be < high_level");
  }
  if (!std::isfinite(spectral_exponent) || !std::isfinite(sigmoid_center)) {
    throw InvalidParameter("binary texture: parameters must be finite");
  }
}

void SignalSpec::validate() const {
  if (!(scale > 0.0)) throw InvalidParameter("signal: scale must be > 0");
  if (!std::isfinite(amplitude)) throw InvalidParameter("signal: amplitude must be finite");
}

void NoiseSpec::validate() const {
  if (!(std >= 0.0) || !std::isfinite(std)) {
    throw InvalidParameter("noise: std must be finite and >= 0");
  }
}

std::size_t background_width(const BackgroundModel& model) {
  return std::visit([](const auto& p) { return p.width; }, model);
}

std::size_t background_height(const BackgroundModel& model) {
  return std::visit([](const auto& p) { return p.height; }, model);
}

std::string background_name(const BackgroundModel& model) {
  return std::holds_alternative<MvnLumpyParams>(model) ? "mvn_lumpy" : "binary_texture";
}

std::size_t LabeledEnsemble::count(Label label) const {
  std::size_t n = 0;
  for (const auto& item : items) n += item.label == label ? 1 : 0;
  return n;
}

std::size_t LabeledEnsemble::width() const {
  return items.empty() ? background_width(provenance.background) : items.front().noisy.width();
}

std::size_t LabeledEnsemble::height() const {
  return items.empty() ? background_height(provenance.background) : items.front().noisy.height();
}

ImageGrid gen_mvn_lumpy(const MvnLumpyParams& params, std::uint64_t seed) {
  params.validate();
  // Spatial Gaussian of std s has transfer exp(-2 pi^2 s^2 |f|^2).
  const double k = 2.0 * std::numbers::pi * std::numbers::pi * params.kernel_std * params.kernel_std;
  auto field = filtered_white_noise(params.width, params.height, seed,
                                    [k](double f) { return std::exp(-k * f * f); });
  for (double& v : field) v = params.dc_offset + params.field_std * v;
  return ImageGrid(params.width, params.height, std::move(field));
}

ImageGrid gen_binary_texture(const BinaryTextureParams& params, std::uint64_t seed) {
  params.validate();
  const double p = params.spectral_exponent;
  auto field = filtered_white_noise(params.width, params.height, seed, [p](double f) {
    return f == 0.0 ? 0.0 : std::pow(f, -p);
  });
  const double span = params.high_level - params.low_level;
  for (double& v : field) {
    const double s = 1.0 / (1.0 + std::exp(-params.sigmoid_steepness * (v - params.sigmoid_center)));
    v = params.low_level + span * s;
  }
  return ImageGrid(params.width, params.height, std::move(field));
}

ImageGrid gen_background(const BackgroundModel& model, std::uint64_t seed) {
  return std::visit(
      [seed](const auto& p) -> ImageGrid {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, MvnLumpyParams>) {
          return gen_mvn_lumpy(p, seed);
        } else {
          return gen_binary_texture(p, seed);
        }
      },
      model);
}

ImageGrid render_signal(const SignalSpec& spec, std::size_t width, std::size_t height) {
  spec.validate();
  ImageGrid out(width, height);
  const double max_row = static_cast<double>(height - 1);
  const double max_col = static_cast<double>(width - 1);
  if (!(spec.center_row >= 0.0 && spec.center_row <= max_row && spec.center_col >= 0.0 &&
        spec.center_col <= max_col)) {
    throw InvalidParameter("signal centre lies outside the grid");
  }
  const double s2 = spec.scale * spec.scale;
  for (std::size_t r = 0; r < height; ++r) {
    const double dr = static_cast<double>(r) - spec.center_row;
    for (std::size_t c = 0; c < width; ++c) {
      const double dc = static_cast<double>(c) - spec.center_col;
      const double d2 = dr * dr + dc * dc;
      if (spec.shape == SignalShape::gaussian) {
        out.at(r, c) = spec.amplitude * std::exp(-d2 / (2.0 * s2));
      } else {
        out.at(r, c) = d2 <= s2 ? spec.amplitude : 0.0;
      }
    }
  }
  return out;
}

ImageGrid add_noise(const ImageGrid& image, const NoiseSpec& spec, std::uint64_t seed) {
  spec.validate();
  ImageGrid out = image;
  if (spec.std == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, spec.std);
  for (double& v : out.values()) v += normal(rng);
  return out;
}

LabeledEnsemble make_ensemble(const BackgroundModel& background, const SignalSpec& signal,
                              const NoiseSpec& noise, std::size_t n_absent,
                              std::size_t n_present, std::uint64_t master_seed,
                              const EnsembleOptions& options) {
  std::visit([](const auto& p) { p.validate(); }, background);
  noise.validate();
  const std::size_t width = background_width(background);
  const std::size_t height = background_height(background);
  const ImageGrid signal_image = render_signal(signal, width, height);

  LabeledEnsemble ensemble;
  ensemble.provenance = {background, signal, noise, master_seed, options.paired_backgrounds};
  ensemble.items.resize(n_absent + n_present);

  parallel_for(ensemble.items.size(), options.jobs, [&](std::size_t i) {
    EnsembleItem& item = ensemble.items[i];
    item.label = i < n_absent ? Label::absent : Label::present;
    std::size_t background_index = i;
    if (options.paired_backgrounds && item.label == Label::present && i - n_absent < n_absent) {
      background_index = i - n_absent;
    }
    item.background_seed = derive_seed(master_seed, background_index, "background");
    item.noise_seed = derive_seed(master_seed, i, "noise");
    item.truth = gen_background(background, item.background_seed);
    if (item.label == Label::present) item.truth += signal_image;
    item.noisy = add_noise(item.truth, noise, item.noise_seed);
  });
  return ensemble;
}

}  // namespace taskpls
