#include "taskpls/persistence.hpp"

#include <cstdio>

#include "taskpls/errors.hpp"
#include "taskpls/raster_io.hpp"

namespace taskpls {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <typename T>
void read_optional(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json parse_json_file(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void require_format(const json& j, const fs::path& path) {
  const int version = j.value("format_version", 0);
  if (version != kFormatVersion) {
    throw IoError(path.string() + ": unsupported format_version " + std::to_string(version));
  }
}

std::string item_file(std::size_t index, const char* role) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "items/%06zu_%s.f64", index, role);
  return buf;
}

}  // namespace

ordered_json to_json(const BackgroundModel& model) {
  ordered_json j;
  if (const auto* p = std::get_if<MvnLumpyParams>(&model)) {
    j["model"] = "mvn_lumpy";
    j["width"] = p->width;
    j["height"] = p->height;
    j["dc_offset"] = p->dc_offset;
    j["kernel_std"] = p->kernel_std;
    j["field_std"] = p->field_std;
  } else {
    const auto& b = std::get<BinaryTextureParams>(model);
    j["model"] = "binary_texture";
    j["width"] = b.width;
    j["height"] = b.height;
    j["spectral_exponent"] = b.spectral_exponent;
    j["sigmoid_center"] = b.sigmoid_center;
    j["sigmoid_steepness"] = b.sigmoid_steepness;
    j["low_level"] = b.low_level;
    j["high_level"] = b.high_level;
  }
  return j;
}

BackgroundModel background_from_json(const json& j) {
  const std::string model = j.at("model").get<std::string>();
  if (model == "mvn_lumpy") {
    MvnLumpyParams p;
    read_optional(j, "width", p.width);
    read_optional(j, "height", p.height);
    read_optional(j, "dc_offset", p.dc_offset);
    read_optional(j, "kernel_std", p.kernel_std);
    read_optional(j, "field_std", p.field_std);
    p.validate();
    return p;
  }
  if (model == "binary_texture") {
    BinaryTextureParams p;
    read_optional(j, "width", p.width);
    read_optional(j, "height", p.height);
    read_optional(j, "spectral_exponent", p.spectral_exponent);
    read_optional(j, "sigmoid_center", p.sigmoid_center);
    read_optional(j, "sigmoid_steepness", p.sigmoid_steepness);
    read_optional(j, "low_level", p.low_level);
    read_optional(j, "high_level", p.high_level);
    p.validate();
    return p;
  }
  throw InvalidParameter("unknown background model '" + model + "'");
}

ordered_json to_json(const SignalSpec& spec) {
  ordered_json j;
  j["shape"] = spec.shape == SignalShape::gaussian ? "gaussian" : "disk";
  j["center"] = {spec.center_row, spec.center_col};
  j["scale"] = spec.scale;
  j["amplitude"] = spec.amplitude;
  return j;
}

SignalSpec signal_from_json(const json& j) {
  SignalSpec s;
  const std::string shape = j.value("shape", std::string("gaussian"));
  if (shape == "gaussian") {
    s.shape = SignalShape::gaussian;
  } else if (shape == "disk") {
    s.shape = SignalShape::disk;
  } else {
    throw InvalidParameter("unknown signal shape '" + shape + "'");
  }
  if (j.contains("center")) {
    const auto& c = j.at("center");
    if (!c.is_array() || c.size() != 2) throw InvalidParameter("signal center must be [row, col]");
    s.center_row = c[0].get<double>();
    s.center_col = c[1].get<double>();
  }
  read_optional(j, "scale", s.scale);
  read_optional(j, "amplitude", s.amplitude);
  s.validate();
  return s;
}

ordered_json to_json(const NoiseSpec& spec) {
  ordered_json j;
  j["std"] = spec.std;
  return j;
}

NoiseSpec noise_from_json(const json& j) {
  NoiseSpec n;
  read_optional(j, "std", n.std);
  n.validate();
  return n;
}

ordered_json to_json(const DenoiseConfig& c) {
  ordered_json j;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["gamma"] = c.gamma;
  j["tv_epsilon"] = c.tv_epsilon;
  j["iterations"] = c.iterations;
  j["step_size"] = c.step_size;
  j["moment_decay_1"] = c.moment_decay_1;
  j["moment_decay_2"] = c.moment_decay_2;
  j["moment_epsilon"] = c.moment_epsilon;
  j["init"] = init_rule_name(c.init);
  j["trace_stride"] = c.trace_stride;
  return j;
}

DenoiseConfig denoise_config_from_json(const json& j, DenoiseConfig c) {
  read_optional(j, "alpha", c.alpha);
  read_optional(j, "beta", c.beta);
  read_optional(j, "gamma", c.gamma);
  read_optional(j, "tv_epsilon", c.tv_epsilon);
  read_optional(j, "iterations", c.iterations);
  read_optional(j, "step_size", c.step_size);
  read_optional(j, "moment_decay_1", c.moment_decay_1);
  read_optional(j, "moment_decay_2", c.moment_decay_2);
  read_optional(j, "moment_epsilon", c.moment_epsilon);
  read_optional(j, "trace_stride", c.trace_stride);
  if (j.contains("init")) c.init = parse_init_rule(j.at("init").get<std::string>());
  return c;
}

std::string save_ensemble(const fs::path& dir, const LabeledEnsemble& ensemble) {
  ordered_json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["kind"] = "labeled_ensemble";
  manifest["width"] = ensemble.width();
  manifest["height"] = ensemble.height();
  manifest["dtype"] = "float64-le";
  manifest["layout"] = "row-major";

  ordered_json prov;
  prov["background"] = to_json(ensemble.provenance.background);
  prov["signal"] = to_json(ensemble.provenance.signal);
  prov["noise"] = to_json(ensemble.provenance.noise);
  prov["master_seed"] = ensemble.provenance.master_seed;
  prov["paired_backgrounds"] = ensemble.provenance.paired_backgrounds;
  manifest["provenance"] = prov;
  manifest["counts"] = {{"absent", ensemble.count(Label::absent)},
                        {"present", ensemble.count(Label::present)}};

  ordered_json items = ordered_json::array();
  for (std::size_t i = 0; i < ensemble.items.size(); ++i) {
    const auto& item = ensemble.items[i];
    const std::string noisy = item_file(i, "noisy");
    const std::string truth = item_file(i, "truth");
    write_raster(dir / noisy, item.noisy);
    write_raster(dir / truth, item.truth);
    ordered_json e;
    e["index"] = i;
    e["label"] = label_name(item.label);
    e["background_seed"] = item.background_seed;
    e["noise_seed"] = item.noise_seed;
    e["noisy"] = noisy;
    e["noisy_sha256"] = sha256_file(dir / noisy);
    e["truth"] = truth;
    e["truth_sha256"] = sha256_file(dir / truth);
    items.push_back(std::move(e));
  }
  manifest["items"] = std::move(items);

  const std::string text = manifest.dump(2) + "\n";
  write_text(dir / "manifest.json", text);
  return sha256_hex(text);
}

LoadedEnsemble load_ensemble(const fs::path& dir, bool verify) {
  const fs::path manifest_path = dir / "manifest.json";
  const std::string text = read_text(manifest_path);
  json manifest;
  try {
    manifest = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + manifest_path.string() + ": " + e.what());
  }
  require_format(manifest, manifest_path);

  LoadedEnsemble out;
  out.manifest_sha256 = sha256_hex(text);
  const auto width = manifest.at("width").get<std::size_t>();
  const auto height = manifest.at("height").get<std::size_t>();
  const auto& prov = manifest.at("provenance");
  out.ensemble.provenance.background = background_from_json(prov.at("background"));
  out.ensemble.provenance.signal = signal_from_json(prov.at("signal"));
  out.ensemble.provenance.noise = noise_from_json(prov.at("noise"));
  out.ensemble.provenance.master_seed = prov.at("master_seed").get<std::uint64_t>();
  out.ensemble.provenance.paired_backgrounds = prov.value("paired_backgrounds", false);

  for (const auto& e : manifest.at("items")) {
    EnsembleItem item;
    item.label = e.at("label").get<std::string>() == "H1" ? Label::present : Label::absent;
    item.background_seed = e.at("background_seed").get<std::uint64_t>();
    item.noise_seed = e.at("noise_seed").get<std::uint64_t>();
    const fs::path noisy = dir / e.at("noisy").get<std::string>();
    const fs::path truth = dir / e.at("truth").get<std::string>();
    if (verify) {
      verify_sha256(noisy, e.at("noisy_sha256").get<std::string>());
      verify_sha256(truth, e.at("truth_sha256").get<std::string>());
    }
    item.noisy = read_raster(noisy, width, height);
    item.truth = read_raster(truth, width, height);
    out.ensemble.items.push_back(std::move(item));
  }

  const auto& counts = manifest.at("counts");
  if (out.ensemble.count(Label::absent) != counts.at("absent").get<std::size_t>() ||
      out.ensemble.count(Label::present) != counts.at("present").get<std::size_t>()) {
    throw IntegrityError(manifest_path.string() + ": item labels disagree with recorded counts");
  }
  return out;
}

std::string save_template(const fs::path& json_path, const ObserverTemplate& tmpl) {
  fs::path weights_path = json_path;
  weights_path.replace_extension(".f64");
  write_f64(weights_path, tmpl.w);

  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = template_kind_name(tmpl.kind);
  j["width"] = tmpl.width;
  j["height"] = tmpl.height;
  j["shrinkage"] = tmpl.shrinkage;
  j["training_meta"] = {{"ensemble_id", tmpl.training_meta.ensemble_id},
                        {"n_absent", tmpl.training_meta.n_absent},
                        {"n_present", tmpl.training_meta.n_present},
                        {"estimated_at", tmpl.training_meta.estimated_at}};
  j["dtype"] = "float64-le";
  j["weights"] = weights_path.filename().string();
  j["weights_sha256"] = sha256_file(weights_path);

  const std::string text = j.dump(2) + "\n";
  write_text(json_path, text);
  return sha256_hex(text);
}

ObserverTemplate load_template(const fs::path& json_path, bool verify) {
  const json j = parse_json_file(json_path);
  require_format(j, json_path);
  ObserverTemplate t;
  t.kind = parse_template_kind(j.at("kind").get<std::string>());
  t.width = j.at("width").get<std::size_t>();
  t.height = j.at("height").get<std::size_t>();
  t.shrinkage = j.value("shrinkage", 0.0);
  if (j.contains("training_meta")) {
    const auto& m = j.at("training_meta");
    t.training_meta.ensemble_id = m.value("ensemble_id", std::string());
    t.training_meta.n_absent = m.value("n_absent", std::size_t{0});
    t.training_meta.n_present = m.value("n_present", std::size_t{0});
    t.training_meta.estimated_at = m.value("estimated_at", std::string());
  }
  const fs::path weights = json_path.parent_path() / j.at("weights").get<std::string>();
  if (verify) verify_sha256(weights, j.at("weights_sha256").get<std::string>());
  t.w = read_f64(weights, t.width * t.height);
  return t;
}

}  // namespace taskpls
