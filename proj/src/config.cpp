#include "tdcr/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <set>

#include "tdcr/errors.hpp"

namespace tdcr {

namespace {

using nlohmann::json;

Eigen::VectorXd vector_from_json(const json& j, int expected, const std::string& key) {
  if (!j.is_array() || static_cast<int>(j.size()) != expected)
    fail(ErrorKind::invalid_argument,
         "config key '" + key + "' must be an array of " + std::to_string(expected));
  Eigen::VectorXd v(expected);
  for (int i = 0; i < expected; ++i) v[i] = j[i].get<double>();
  return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

// Applies `fn(key, value)` for every key and rejects unknown ones.
void apply_section(const json& j, const std::string& section,
                   const std::set<std::string>& known,
                   const std::function<void(const std::string&, const json&)>& fn) {
  if (!j.is_object())
    fail(ErrorKind::invalid_argument, "config section '" + section + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key))
      fail(ErrorKind::invalid_argument,
           "unknown config key '" + section + "." + key + "'");
    fn(key, value);
  }
}

}  // namespace

WorkbenchConfig default_config() { return WorkbenchConfig{}; }

void apply_config_json(WorkbenchConfig& cfg, const json& j) {
  static const std::set<std::string> top = {
      "master_seed", "plant", "dataset", "surrogate", "augment",
      "trainer", "jacobian", "eval"};
  if (!j.is_object())
    fail(ErrorKind::invalid_argument, "config root must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!top.count(key))
      fail(ErrorKind::invalid_argument, "unknown config key '" + key + "'");

  if (j.contains("master_seed")) cfg.master_seed = j["master_seed"].get<uint64_t>();

  if (j.contains("plant")) {
    auto& p = cfg.plant;
    apply_section(j["plant"], "plant",
                  {"section_lengths", "pitch_radius", "backlash_width", "lag_tau",
                   "dt", "l_min", "l_max", "v_max", "meas_noise_pos", "meas_noise_ori"},
                  [&](const std::string& k, const json& v) {
                    if (k == "section_lengths")
                      p.section_lengths = vector_from_json(v, 3, "plant.section_lengths");
                    else if (k == "pitch_radius") p.pitch_radius = v.get<double>();
                    else if (k == "backlash_width") p.backlash_width = v.get<double>();
                    else if (k == "lag_tau") p.lag_tau = v.get<double>();
                    else if (k == "dt") p.dt = v.get<double>();
                    else if (k == "l_min") p.l_min = v.get<double>();
                    else if (k == "l_max") p.l_max = v.get<double>();
                    else if (k == "v_max") p.v_max = v.get<double>();
                    else if (k == "meas_noise_pos") p.meas_noise_pos = v.get<double>();
                    else if (k == "meas_noise_ori") p.meas_noise_ori = v.get<double>();
                  });
  }

  if (j.contains("dataset")) {
    auto& d = cfg.dataset;
    apply_section(j["dataset"], "dataset",
                  {"n_trajectories", "steps", "holdout_fraction", "vel_std",
                   "vel_rho", "retarget_prob"},
                  [&](const std::string& k, const json& v) {
                    if (k == "n_trajectories") d.n_trajectories = v.get<int>();
                    else if (k == "steps") d.steps = v.get<int>();
                    else if (k == "holdout_fraction") d.holdout_fraction = v.get<double>();
                    else if (k == "vel_std") d.excitation.vel_std = v.get<double>();
                    else if (k == "vel_rho") d.excitation.vel_rho = v.get<double>();
                    else if (k == "retarget_prob") d.excitation.retarget_prob = v.get<double>();
                  });
  }

  if (j.contains("surrogate")) {
    auto& s = cfg.surrogate;
    apply_section(j["surrogate"], "surrogate",
                  {"layers", "width", "head_hidden", "dropout", "epochs",
                   "windows_per_epoch", "batch", "warmup", "k_max", "probe_windows",
                   "lr", "grad_clip"},
                  [&](const std::string& k, const json& v) {
                    if (k == "layers") s.arch.layers = v.get<int>();
                    else if (k == "width") s.arch.width = v.get<int>();
                    else if (k == "head_hidden") s.arch.head_hidden = v.get<int>();
                    else if (k == "dropout") s.arch.dropout = v.get<double>();
                    else if (k == "epochs") s.epochs = v.get<int>();
                    else if (k == "windows_per_epoch") s.windows_per_epoch = v.get<int>();
                    else if (k == "batch") s.batch = v.get<int>();
                    else if (k == "warmup") s.warmup = v.get<int>();
                    else if (k == "k_max") s.k_max = v.get<int>();
                    else if (k == "probe_windows") s.probe_windows = v.get<int>();
                    else if (k == "lr") s.lr = v.get<double>();
                    else if (k == "grad_clip") s.grad_clip = v.get<double>();
                  });
  }

  if (j.contains("augment")) {
    auto& a = cfg.trainer.augment;
    apply_section(j["augment"], "augment",
                  {"bias_max", "sine_amp_max", "sine_freq_max", "step_prob",
                   "walk_step_max", "hold_prob"},
                  [&](const std::string& k, const json& v) {
                    if (k == "bias_max") a.bias_max = vector_from_json(v, 6, "augment.bias_max");
                    else if (k == "sine_amp_max")
                      a.sine_amp_max = vector_from_json(v, 6, "augment.sine_amp_max");
                    else if (k == "sine_freq_max") a.sine_freq_max = v.get<double>();
                    else if (k == "step_prob") a.step_prob = v.get<double>();
                    else if (k == "walk_step_max")
                      a.walk_step_max = vector_from_json(v, 6, "augment.walk_step_max");
                    else if (k == "hold_prob") a.hold_prob = v.get<double>();
                  });
  }

  if (j.contains("trainer")) {
    auto& t = cfg.trainer;
    apply_section(j["trainer"], "trainer",
                  {"n_init", "n_reference", "n_predict", "discount", "action_weight",
                   "ori_weight", "batch", "iterations", "lr", "grad_clip",
                   "augmentation", "layers", "width", "dropout", "snapshot_iterations"},
                  [&](const std::string& k, const json& v) {
                    if (k == "n_init") t.n_init = v.get<int>();
                    else if (k == "n_reference") t.n_reference = v.get<int>();
                    else if (k == "n_predict") t.n_predict = v.get<int>();
                    else if (k == "discount") t.discount = v.get<double>();
                    else if (k == "action_weight") t.action_weight = v.get<double>();
                    else if (k == "ori_weight") t.ori_weight = v.get<double>();
                    else if (k == "batch") t.batch = v.get<int>();
                    else if (k == "iterations") t.iterations = v.get<int>();
                    else if (k == "lr") t.lr = v.get<double>();
                    else if (k == "grad_clip") t.grad_clip = v.get<double>();
                    else if (k == "augmentation") t.augmentation = v.get<bool>();
                    else if (k == "layers") t.arch.layers = v.get<int>();
                    else if (k == "width") t.arch.width = v.get<int>();
                    else if (k == "dropout") t.arch.dropout = v.get<double>();
                    else if (k == "snapshot_iterations")
                      t.snapshot_iterations = v.get<std::vector<int>>();
                  });
  }

  if (j.contains("jacobian")) {
    auto& jc = cfg.jacobian;
    apply_section(j["jacobian"], "jacobian",
                  {"probe_step", "damping", "weights", "gains", "refresh_period",
                   "settle_steps"},
                  [&](const std::string& k, const json& v) {
                    if (k == "probe_step") jc.probe_step = v.get<double>();
                    else if (k == "damping") jc.damping = v.get<double>();
                    else if (k == "weights")
                      jc.weights = vector_from_json(v, kNumMotors, "jacobian.weights");
                    else if (k == "gains")
                      jc.gains = vector_from_json(v, 6, "jacobian.gains");
                    else if (k == "refresh_period") jc.refresh_period = v.get<int>();
                    else if (k == "settle_steps") jc.settle_steps = v.get<int>();
                  });
  }

  if (j.contains("eval")) {
    auto& e = cfg.eval;
    apply_section(j["eval"], "eval",
                  {"glyphs", "speeds", "window_width", "window_height", "z_offset",
                   "dwell_s", "nominal_orientation", "reference_bias"},
                  [&](const std::string& k, const json& v) {
                    if (k == "glyphs") e.glyphs = v.get<std::vector<std::string>>();
                    else if (k == "speeds") e.speeds = v.get<std::vector<double>>();
                    else if (k == "window_width") e.window.width = v.get<double>();
                    else if (k == "window_height") e.window.height = v.get<double>();
                    else if (k == "z_offset") e.window.z_offset = v.get<double>();
                    else if (k == "dwell_s") e.window.dwell_s = v.get<double>();
                    else if (k == "nominal_orientation")
                      e.window.nominal_orientation =
                          vector_from_json(v, 3, "eval.nominal_orientation");
                    else if (k == "reference_bias")
                      e.reference_bias = vector_from_json(v, 6, "eval.reference_bias");
                  });
  }

  // Shared timing: the augmentation phase and plant loop use the same dt.
  cfg.trainer.augment.dt = cfg.plant.dt;
}

WorkbenchConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::io, "cannot open config: " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::invalid_argument, std::string("config parse error: ") + e.what());
  }
  WorkbenchConfig cfg = default_config();
  apply_config_json(cfg, j);
  return cfg;
}

nlohmann::json config_to_json(const WorkbenchConfig& cfg) {
  json j;
  j["master_seed"] = cfg.master_seed;
  j["plant"] = {{"section_lengths", vector_to_json(cfg.plant.section_lengths)},
                {"pitch_radius", cfg.plant.pitch_radius},
                {"backlash_width", cfg.plant.backlash_width},
                {"lag_tau", cfg.plant.lag_tau},
                {"dt", cfg.plant.dt},
                {"l_min", cfg.plant.l_min},
                {"l_max", cfg.plant.l_max},
                {"v_max", cfg.plant.v_max},
                {"meas_noise_pos", cfg.plant.meas_noise_pos},
                {"meas_noise_ori", cfg.plant.meas_noise_ori}};
  j["dataset"] = {{"n_trajectories", cfg.dataset.n_trajectories},
                  {"steps", cfg.dataset.steps},
                  {"holdout_fraction", cfg.dataset.holdout_fraction},
                  {"vel_std", cfg.dataset.excitation.vel_std},
                  {"vel_rho", cfg.dataset.excitation.vel_rho},
                  {"retarget_prob", cfg.dataset.excitation.retarget_prob}};
  j["surrogate"] = {{"layers", cfg.surrogate.arch.layers},
                    {"width", cfg.surrogate.arch.width},
                    {"head_hidden", cfg.surrogate.arch.head_hidden},
                    {"dropout", cfg.surrogate.arch.dropout},
                    {"epochs", cfg.surrogate.epochs},
                    {"windows_per_epoch", cfg.surrogate.windows_per_epoch},
                    {"batch", cfg.surrogate.batch},
                    {"warmup", cfg.surrogate.warmup},
                    {"k_max", cfg.surrogate.k_max},
                    {"probe_windows", cfg.surrogate.probe_windows},
                    {"lr", cfg.surrogate.lr},
                    {"grad_clip", cfg.surrogate.grad_clip}};
  j["augment"] = {{"bias_max", vector_to_json(cfg.trainer.augment.bias_max)},
                  {"sine_amp_max", vector_to_json(cfg.trainer.augment.sine_amp_max)},
                  {"sine_freq_max", cfg.trainer.augment.sine_freq_max},
                  {"step_prob", cfg.trainer.augment.step_prob},
                  {"walk_step_max", vector_to_json(cfg.trainer.augment.walk_step_max)},
                  {"hold_prob", cfg.trainer.augment.hold_prob}};
  j["trainer"] = {{"n_init", cfg.trainer.n_init},
                  {"n_reference", cfg.trainer.n_reference},
                  {"n_predict", cfg.trainer.n_predict},
                  {"discount", cfg.trainer.discount},
                  {"action_weight", cfg.trainer.action_weight},
                  {"ori_weight", cfg.trainer.ori_weight},
                  {"batch", cfg.trainer.batch},
                  {"iterations", cfg.trainer.iterations},
                  {"lr", cfg.trainer.lr},
                  {"grad_clip", cfg.trainer.grad_clip},
                  {"augmentation", cfg.trainer.augmentation},
                  {"layers", cfg.trainer.arch.layers},
                  {"width", cfg.trainer.arch.width},
                  {"dropout", cfg.trainer.arch.dropout},
                  {"snapshot_iterations", cfg.trainer.snapshot_iterations}};
  j["jacobian"] = {{"probe_step", cfg.jacobian.probe_step},
                   {"damping", cfg.jacobian.damping},
                   {"weights", vector_to_json(cfg.jacobian.weights)},
                   {"gains", vector_to_json(cfg.jacobian.gains)},
                   {"refresh_period", cfg.jacobian.refresh_period},
                   {"settle_steps", cfg.jacobian.settle_steps}};
  j["eval"] = {{"glyphs", cfg.eval.glyphs},
               {"speeds", cfg.eval.speeds},
               {"window_width", cfg.eval.window.width},
               {"window_height", cfg.eval.window.height},
               {"z_offset", cfg.eval.window.z_offset},
               {"dwell_s", cfg.eval.window.dwell_s},
               {"nominal_orientation", vector_to_json(cfg.eval.window.nominal_orientation)},
               {"reference_bias", vector_to_json(cfg.eval.reference_bias)}};
  return j;
}

void save_config(const WorkbenchConfig& cfg, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) fail(ErrorKind::io, "cannot open for writing: " + path);
  os << config_to_json(cfg).dump(2) << "\n";
}

std::string config_hash(const WorkbenchConfig& cfg) {
  const std::string dump = config_to_json(cfg).dump();
  uint64_t h = 0xCBF29CE484222325ull;
  for (char c : dump) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return std::string(hex);
}

}  // namespace tdcr
