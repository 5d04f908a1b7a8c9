#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "tdcr/jacobian_controller.hpp"
#include "tdcr/plant.hpp"
#include "tdcr/ref_augment.hpp"
#include "tdcr/surrogate.hpp"
#include "tdcr/trainer.hpp"
#include "tdcr/trajectories.hpp"

namespace tdcr {

struct DatasetConfig {
  int n_trajectories = 24;
  int steps = 1200;
  double holdout_fraction = 0.2;  // trailing trajectories reserved for evaluation
  ExcitationConfig excitation;
};

struct EvalSettings {
  std::vector<std::string> glyphs = {"R", "O", "B", "T", "line"};
  std::vector<double> speeds = {1.0};
  GlyphWindow window;
  Eigen::Matrix<double, 6, 1> reference_bias = Eigen::Matrix<double, 6, 1>::Zero();
};

// Every tunable of the workbench in one structured config file; the JSON key
// set is documented in the README. Unknown keys are rejected.
struct WorkbenchConfig {
  uint64_t master_seed = 1;
  PlantConfig plant;
  DatasetConfig dataset;
  SurrogateTrainConfig surrogate;
  TrainConfig trainer;
  JacobianConfig jacobian;
  EvalSettings eval;
};

WorkbenchConfig default_config();
WorkbenchConfig load_config(const std::string& path);
void apply_config_json(WorkbenchConfig& cfg, const nlohmann::json& j);
nlohmann::json config_to_json(const WorkbenchConfig& cfg);
void save_config(const WorkbenchConfig& cfg, const std::string& path);

// FNV-1a hash of the canonical JSON dump, hex string; stored in manifests.
std::string config_hash(const WorkbenchConfig& cfg);

}  // namespace tdcr
