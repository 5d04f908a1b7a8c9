#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "tdcr/autodiff.hpp"
#include "tdcr/dataset.hpp"
#include "tdcr/policy.hpp"
#include "tdcr/ref_augment.hpp"
#include "tdcr/surrogate.hpp"

namespace tdcr {

struct TrainConfig {
  int n_init = 50;       // warm-up pairs
  int n_reference = 50;  // look-ahead poses in the policy input
  int n_predict = 250;   // optimization horizon
  double discount = 1.0;       // lambda in the discounted cost
  double action_weight = 0.01; // alpha, on standardized increments
  double ori_weight = 1.0;     // beta_ori, on standardized pose channels
  int batch = 4;
  int iterations = 300;
  double lr = 1e-3;
  double grad_clip = 1.0;
  uint64_t seed = 1;
  bool augmentation = true;
  AugmentConfig augment;
  PolicyArch arch;                        // n_reference is overwritten from above
  std::vector<int> snapshot_iterations;   // optional mid-training snapshots
  bool verbose = false;

  void validate() const;
};

struct TrainReport {
  std::vector<double> loss;           // total, per iteration (batch mean)
  std::vector<double> tracking_cost;  // discounted pose term / N_p
  std::vector<double> action_cost;    // alpha-weighted increment term / N_p
  std::vector<double> grad_norm;
  std::vector<double> wall_time_s;    // excluded from deterministic artifacts
};

struct RolloutLossResult {
  ad::Value total;        // scalar on the tape: discounted sum / N_p
  double tracking = 0.0;  // forward value of the pose term
  double action = 0.0;    // forward value of the increment term
};

// Builds the full warm-up + auto-regressive rollout objective on the tape.
// The surrogate is lifted without gradients (frozen); the policy with.
RolloutLossResult rollout_loss(ad::Tape& tape, const TapePolicy& policy,
                               const TapeSurrogate& surrogate_net,
                               const SurrogateModel& surrogate,
                               const PolicyModel& policy_model,
                               const RolloutBatch& batch,
                               const std::optional<AugmentParams>& augment,
                               const TrainConfig& cfg);

struct PolicySnapshot {
  int iteration = 0;
  PolicyModel model;
};

PolicyModel train_policy(const Dataset& dataset, const SurrogateModel& surrogate,
                         const TrainConfig& cfg, double delta_a_max, double l_min,
                         double l_max, TrainReport* report = nullptr,
                         std::vector<PolicySnapshot>* snapshots = nullptr);

}  // namespace tdcr
