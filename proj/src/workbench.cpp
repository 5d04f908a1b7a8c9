#include "tdcr/workbench.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "tdcr/checkpoint.hpp"
#include "tdcr/errors.hpp"

namespace tdcr {

namespace fs = std::filesystem;

Workbench::Workbench(WorkbenchConfig cfg, std::string out_dir, bool verbose)
    : cfg_(std::move(cfg)), out_dir_(std::move(out_dir)), verbose_(verbose) {
  if (!out_dir_.empty()) fs::create_directories(out_dir_);
}

std::string Workbench::resolve(const std::string& path) const {
  if (out_dir_.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(out_dir_) / path).string();
}

void Workbench::write_manifest(const std::string& path, const std::string& command,
                               const nlohmann::json& detail) const {
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = config_hash(cfg_);
  j["master_seed"] = cfg_.master_seed;
  j["detail"] = detail;
  std::ofstream os(path, std::ios::trunc);
  if (!os) fail(ErrorKind::io, "cannot open for writing: " + path);
  os << j.dump(2) << "\n";
}

std::pair<Dataset, Dataset> Workbench::split_dataset(const Dataset& full,
                                                     double holdout_fraction) {
  if (holdout_fraction < 0.0 || holdout_fraction >= 1.0)
    fail(ErrorKind::invalid_argument, "holdout fraction must be in [0, 1)");
  const int n = static_cast<int>(full.trajectories.size());
  int holdout = static_cast<int>(std::lround(n * holdout_fraction));
  if (holdout >= n) holdout = n - 1;
  Dataset train, held;
  train.dt = held.dt = full.dt;
  for (int i = 0; i < n - holdout; ++i) train.trajectories.push_back(full.trajectories[i]);
  for (int i = n - holdout; i < n; ++i) held.trajectories.push_back(full.trajectories[i]);
  return {train, held};
}

void Workbench::collect(const std::string& dataset_path) const {
  const std::string path = resolve(dataset_path);
  Dataset ds = collect_dataset(cfg_.plant, cfg_.dataset.excitation,
                               cfg_.dataset.n_trajectories, cfg_.dataset.steps,
                               derive_seed(cfg_.master_seed, "collect"));
  save_dataset(ds, path);
  write_manifest(path + ".manifest.json", "collect",
                 {{"dataset", dataset_path},
                  {"digest", file_digest(path)},
                  {"trajectories", cfg_.dataset.n_trajectories},
                  {"steps", cfg_.dataset.steps}});
  if (verbose_)
    std::cout << "collected " << cfg_.dataset.n_trajectories << " trajectories x "
              << cfg_.dataset.steps << " steps -> " << path << "\n";
}

void Workbench::export_csv(const std::string& dataset_path, int trajectory_index,
                           const std::string& csv_path) const {
  Dataset ds = load_dataset(resolve(dataset_path));
  export_trajectory_csv(ds, trajectory_index, resolve(csv_path));
}

void Workbench::train_dynamics(const std::string& dataset_path,
                               const std::string& checkpoint_path) const {
  Dataset full = load_dataset(resolve(dataset_path));
  auto [train, held] = split_dataset(full, cfg_.dataset.holdout_fraction);

  SurrogateTrainConfig tc = cfg_.surrogate;
  tc.seed = derive_seed(cfg_.master_seed, "dynamics");
  tc.verbose = verbose_;
  SurrogateTrainReport report;
  SurrogateModel model = train_surrogate(train, tc, &report);

  const std::string path = resolve(checkpoint_path);
  save_surrogate(model, path);

  std::ofstream curve(path + ".train.csv", std::ios::trunc);
  if (!curve) fail(ErrorKind::io, "cannot open for writing: " + path + ".train.csv");
  curve << "epoch,k,probe_loss,train_loss\n";
  char buf[64];
  for (size_t e = 0; e < report.epoch_loss.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g", report.epoch_loss[e],
                  report.epoch_train_loss[e]);
    curve << e + 1 << "," << report.epoch_k[e] << "," << buf << "\n";
  }
  std::ofstream timing(path + ".timing.csv", std::ios::trunc);
  timing << "epoch,wall_time_s\n";
  for (size_t e = 0; e < report.wall_time_s.size(); ++e)
    timing << e + 1 << "," << report.wall_time_s[e] << "\n";

  write_manifest(path + ".manifest.json", "train-dynamics",
                 {{"dataset", dataset_path},
                  {"dataset_digest", file_digest(resolve(dataset_path))},
                  {"checkpoint", checkpoint_path},
                  {"checkpoint_digest", file_digest(path)},
                  {"train_trajectories", train.trajectories.size()},
                  {"holdout_trajectories", held.trajectories.size()}});
}

void Workbench::train_policy_cmd(const std::string& dataset_path,
                                 const std::string& dynamics_checkpoint,
                                 bool augmentation,
                                 const std::string& policy_checkpoint) const {
  Dataset full = load_dataset(resolve(dataset_path));
  auto [train, held] = split_dataset(full, cfg_.dataset.holdout_fraction);
  SurrogateModel surrogate = load_surrogate(resolve(dynamics_checkpoint));

  TrainConfig tc = cfg_.trainer;
  tc.augmentation = augmentation;
  tc.augment.dt = cfg_.plant.dt;
  tc.seed = derive_seed(cfg_.master_seed, "policy");
  tc.verbose = verbose_;

  TrainReport report;
  std::vector<PolicySnapshot> snapshots;
  PolicyModel policy = train_policy(train, surrogate, tc,
                                    cfg_.plant.v_max * cfg_.plant.dt, cfg_.plant.l_min,
                                    cfg_.plant.l_max, &report, &snapshots);

  const std::string path = resolve(policy_checkpoint);
  save_policy(policy, path, {{"augmentation", augmentation}});
  nlohmann::json snap_list = nlohmann::json::array();
  for (const auto& snap : snapshots) {
    const std::string snap_path = path + ".iter" + std::to_string(snap.iteration);
    save_policy(snap.model, snap_path,
                {{"augmentation", augmentation}, {"iteration", snap.iteration}});
    snap_list.push_back(snap_path);
  }

  std::ofstream curve(path + ".train.csv", std::ios::trunc);
  if (!curve) fail(ErrorKind::io, "cannot open for writing: " + path + ".train.csv");
  curve << "iteration,loss,tracking_cost,action_cost,grad_norm\n";
  char buf[128];
  for (size_t i = 0; i < report.loss.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g", report.loss[i],
                  report.tracking_cost[i], report.action_cost[i], report.grad_norm[i]);
    curve << i << "," << buf << "\n";
  }
  std::ofstream timing(path + ".timing.csv", std::ios::trunc);
  timing << "iteration,wall_time_s\n";
  for (size_t i = 0; i < report.wall_time_s.size(); ++i)
    timing << i << "," << report.wall_time_s[i] << "\n";

  write_manifest(path + ".manifest.json", "train-policy",
                 {{"dataset", dataset_path},
                  {"dynamics_checkpoint", dynamics_checkpoint},
                  {"dynamics_digest", file_digest(resolve(dynamics_checkpoint))},
                  {"augmentation", augmentation},
                  {"checkpoint", policy_checkpoint},
                  {"checkpoint_digest", file_digest(path)},
                  {"snapshots", snap_list}});
}

void Workbench::evaluate_cmd(const std::string& controller, const std::string& backend,
                             const std::string& dynamics_checkpoint,
                             const std::string& report_prefix) const {
  SurrogateModel surrogate = load_surrogate(resolve(dynamics_checkpoint));
  ControllerSpec spec;
  if (controller == "jacobian") {
    spec.id = "jacobian";
    spec.jacobian = cfg_.jacobian;
  } else {
    spec.id = "policy:" + controller;
    spec.policy = load_policy(resolve(controller));
  }
  EvalReport report = evaluate_controller(spec, backend, surrogate, cfg_,
                                          derive_seed(cfg_.master_seed, "eval"));
  const std::string prefix = resolve(report_prefix);
  write_eval_report(report, prefix);
  ReportTable table = report_to_table({report});
  std::ofstream txt(prefix + ".table.txt", std::ios::trunc);
  if (!txt) fail(ErrorKind::io, "cannot open for writing: " + prefix + ".table.txt");
  txt << render_table(table);
  std::ofstream tj(prefix + ".table.json", std::ios::trunc);
  tj << table_to_json(table).dump(2) << "\n";

  nlohmann::json detail = {{"controller", spec.id},
                           {"backend", backend},
                           {"dynamics_checkpoint", dynamics_checkpoint}};
  if (controller != "jacobian")
    detail["policy_digest"] = file_digest(resolve(controller));
  write_manifest(prefix + ".manifest.json", "eval", detail);
  if (verbose_)
    std::cout << "eval " << spec.id << " on " << backend
              << ": mean position error " << report.overall.mean_pos_mm
              << " mm, orientation " << report.overall.mean_ori_deg << " deg\n";
}

void Workbench::correlate_cmd(const std::vector<std::string>& policy_checkpoints,
                              const std::string& dynamics_checkpoint,
                              const std::string& report_prefix) const {
  SurrogateModel surrogate = load_surrogate(resolve(dynamics_checkpoint));
  std::vector<PolicyModel> policies;
  std::vector<std::string> labels;
  for (const auto& path : policy_checkpoints) {
    policies.push_back(load_policy(resolve(path)));
    labels.push_back(path);
  }
  CorrelationStudy study = correlation_study(policies, labels, surrogate, cfg_,
                                             derive_seed(cfg_.master_seed, "correlate"));
  const std::string prefix = resolve(report_prefix);
  std::ofstream csv(prefix + ".points.csv", std::ios::trunc);
  if (!csv) fail(ErrorKind::io, "cannot open for writing: " + prefix + ".points.csv");
  csv << "checkpoint,surrogate_pos_mm,plant_pos_mm,surrogate_ori_deg,plant_ori_deg\n";
  char buf[128];
  for (const auto& p : study.points) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f", p.surrogate_pos_mm,
                  p.plant_pos_mm, p.surrogate_ori_deg, p.plant_ori_deg);
    csv << p.checkpoint << "," << buf << "\n";
  }
  nlohmann::json j;
  j["position"] = {{"slope", study.position.slope},
                   {"intercept", study.position.intercept},
                   {"pearson_r", study.position.pearson_r}};
  j["orientation"] = {{"slope", study.orientation.slope},
                      {"intercept", study.orientation.intercept},
                      {"pearson_r", study.orientation.pearson_r}};
  std::ofstream js(prefix + ".fit.json", std::ios::trunc);
  js << j.dump(2) << "\n";
  write_manifest(prefix + ".manifest.json", "correlate",
                 {{"checkpoints", policy_checkpoints},
                  {"dynamics_checkpoint", dynamics_checkpoint}});
  if (verbose_)
    std::cout << "correlation: position r=" << study.position.pearson_r
              << " slope=" << study.position.slope
              << ", orientation r=" << study.orientation.pearson_r << "\n";
}

void Workbench::sweep_cmd(const std::string& axis, const std::vector<int>& values,
                          const std::string& dataset_path,
                          const std::string& dynamics_checkpoint,
                          const std::string& report_prefix) const {
  if (axis != "np" && axis != "nr")
    fail(ErrorKind::invalid_argument, "sweep axis must be 'np' or 'nr'");
  for (size_t i = 1; i < values.size(); ++i)
    if (values[i] <= values[i - 1])
      fail(ErrorKind::invalid_argument, "sweep values must be sorted ascending");

  Dataset full = load_dataset(resolve(dataset_path));
  auto [train, held] = split_dataset(full, cfg_.dataset.holdout_fraction);
  SurrogateModel surrogate = load_surrogate(resolve(dynamics_checkpoint));

  const std::string prefix = resolve(report_prefix);
  std::ofstream csv(prefix + ".csv", std::ios::trunc);
  if (!csv) fail(ErrorKind::io, "cannot open for writing: " + prefix + ".csv");
  csv << "axis,value,failed,mean_pos_mm,mean_ori_deg\n";

  for (int value : values) {
    TrainConfig tc = cfg_.trainer;
    tc.augment.dt = cfg_.plant.dt;
    tc.seed = derive_seed(cfg_.master_seed, "policy");
    tc.verbose = verbose_;
    if (axis == "np") tc.n_predict = value;
    else tc.n_reference = value;

    bool failed = false;
    double pos = 0.0, ori = 0.0;
    try {
      PolicyModel policy =
          train_policy(train, surrogate, tc, cfg_.plant.v_max * cfg_.plant.dt,
                       cfg_.plant.l_min, cfg_.plant.l_max, nullptr, nullptr);
      ControllerSpec spec;
      spec.id = axis + "=" + std::to_string(value);
      spec.policy = policy;
      EvalReport report = evaluate_controller(spec, "plant", surrogate, cfg_,
                                              derive_seed(cfg_.master_seed, "sweep"));
      pos = report.overall.mean_pos_mm;
      ori = report.overall.mean_ori_deg;
      write_eval_report(report, prefix + "." + axis + std::to_string(value));
    } catch (const Error& e) {
      failed = true;
      if (verbose_)
        std::cout << "sweep " << axis << "=" << value << " failed: " << e.what() << "\n";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f", pos, ori);
    csv << axis << "," << value << "," << (failed ? 1 : 0) << "," << buf << "\n";
    if (verbose_ && !failed)
      std::cout << "sweep " << axis << "=" << value << ": pos " << pos << " mm, ori "
                << ori << " deg\n";
  }
  write_manifest(prefix + ".manifest.json", "sweep",
                 {{"axis", axis},
                  {"values", values},
                  {"dataset", dataset_path},
                  {"dynamics_checkpoint", dynamics_checkpoint}});
}

void Workbench::render_report_file(const std::string& table_json_path,
                                   const std::string& out_txt_path) {
  std::ifstream is(table_json_path);
  if (!is) fail(ErrorKind::io, "cannot open: " + table_json_path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::invalid_argument, std::string("report json parse error: ") + e.what());
  }
  ReportTable table = table_from_json(j);
  std::ofstream os(out_txt_path, std::ios::trunc);
  if (!os) fail(ErrorKind::io, "cannot open for writing: " + out_txt_path);
  os << render_table(table);
}

}  // namespace tdcr
