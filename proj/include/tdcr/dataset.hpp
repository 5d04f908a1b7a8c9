#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "tdcr/core_math.hpp"
#include "tdcr/rng.hpp"

namespace tdcr {

// One operational session recorded at a fixed 50 Hz: row t holds the
// observation seen at step t and the action applied during step t.
struct Trajectory {
  Eigen::MatrixXd observations;  // steps x 24
  Eigen::MatrixXd actions;       // steps x 9
  uint64_t session_id = 0;

  int steps() const { return static_cast<int>(observations.rows()); }
  Observation observation(int t) const;
  Eigen::VectorXd action(int t) const { return actions.row(t).transpose(); }
  Pose6 pose(int t) const;
};

struct Dataset {
  std::vector<Trajectory> trajectories;
  double dt = 0.02;

  int64_t total_steps() const;
};

// Binary container with a versioned header plus a human-readable JSON
// sidecar (<path>.meta.json). Round-trips are bit-exact.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

// One row per step: 9 lengths, 9 velocities, 6 pose, 9 action.
void export_trajectory_csv(const Dataset& ds, int trajectory_index,
                           const std::string& path);

// One BPTT optimization sample. All indices refer to one source trajectory;
// `start` is the decision time t: warm-up covers [t-n_init, t), the future
// segment covers (t, t+horizon] with horizon = n_predict + n_reference - 1.
struct RolloutBatch {
  int trajectory_index = 0;
  int start = 0;  // decision time t
  Eigen::MatrixXd warmup_obs;      // n_init x 24
  Eigen::MatrixXd warmup_actions;  // n_init x 9
  Eigen::VectorXd obs_start;       // flat observation at t
  Eigen::VectorXd action_prev;     // action applied at t-1
  Pose6 pose_start;                // T_t, base pose for reference mixing
  std::vector<Pose6> future_poses;        // T_{t+1} .. T_{t+horizon}
  Eigen::MatrixXd future_observations;    // horizon x 24, diagnostics
};

// Uniform over valid (trajectory, start) pairs; longer trajectories are
// weighted by their valid-start count.
RolloutBatch sample_rollout(const Dataset& ds, int n_init, int n_predict,
                            int n_reference, RandomStream& rng);

// Number of valid decision times summed over trajectories.
int64_t count_valid_starts(const Dataset& ds, int n_init, int n_predict,
                           int n_reference);

RolloutBatch make_rollout(const Dataset& ds, int trajectory_index, int start,
                          int n_init, int n_predict, int n_reference);

}  // namespace tdcr
