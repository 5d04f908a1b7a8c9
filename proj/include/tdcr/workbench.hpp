#pragma once

#include <string>
#include <vector>

#include "tdcr/config.hpp"
#include "tdcr/evaluation.hpp"

namespace tdcr {

// High-level pipeline operations behind the CLI and the C API. Every command
// writes its outputs plus a JSON manifest (config hash, seeds, input digests)
// under out_dir-relative paths.
class Workbench {
 public:
  Workbench(WorkbenchConfig cfg, std::string out_dir, bool verbose = false);

  const WorkbenchConfig& config() const { return cfg_; }

  // Offline data collection on the simulated plant.
  void collect(const std::string& dataset_path) const;

  void export_csv(const std::string& dataset_path, int trajectory_index,
                  const std::string& csv_path) const;

  // Trains the dynamics surrogate on the non-holdout split.
  void train_dynamics(const std::string& dataset_path,
                      const std::string& checkpoint_path) const;

  // Trains the tracking policy through the frozen surrogate; optional
  // snapshots are written next to the checkpoint as <path>.iterNNN.
  void train_policy_cmd(const std::string& dataset_path,
                        const std::string& dynamics_checkpoint, bool augmentation,
                        const std::string& policy_checkpoint) const;

  // controller: "jacobian" or a policy checkpoint path.
  // backend: "plant" or "surrogate".
  void evaluate_cmd(const std::string& controller, const std::string& backend,
                    const std::string& dynamics_checkpoint,
                    const std::string& report_prefix) const;

  void correlate_cmd(const std::vector<std::string>& policy_checkpoints,
                     const std::string& dynamics_checkpoint,
                     const std::string& report_prefix) const;

  // axis: "np" or "nr". Trains one policy per value and evaluates on the
  // plant; divergent values are marked failed and the sweep continues.
  void sweep_cmd(const std::string& axis, const std::vector<int>& values,
                 const std::string& dataset_path,
                 const std::string& dynamics_checkpoint,
                 const std::string& report_prefix) const;

  // Renders a report-table JSON (see table_to_json) to fixed-layout text.
  static void render_report_file(const std::string& table_json_path,
                                 const std::string& out_txt_path);

  // Train/holdout split used by train_dynamics and the prediction checks.
  static std::pair<Dataset, Dataset> split_dataset(const Dataset& full,
                                                   double holdout_fraction);

 private:
  std::string resolve(const std::string& path) const;
  void write_manifest(const std::string& path, const std::string& command,
                      const nlohmann::json& detail) const;

  WorkbenchConfig cfg_;
  std::string out_dir_;
  bool verbose_ = false;
};

}  // namespace tdcr
