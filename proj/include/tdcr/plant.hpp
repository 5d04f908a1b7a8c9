#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cstdint>

#include "tdcr/core_math.hpp"
#include "tdcr/dataset.hpp"

namespace tdcr {

// Ground-truth stand-in for the physical three-section tendon robot:
// piecewise-constant-curvature geometry driven through a per-tendon backlash
// operator and a first-order lag, which together produce the path-dependent
// behavior the learned controller has to cope with.
struct PlantConfig {
  Eigen::Vector3d section_lengths{100.0, 100.0, 100.0};  // mm
  double pitch_radius = 10.0;    // mm, tendon routing radius
  double backlash_width = 1.5;   // mm, half-width of the play band
  double lag_tau = 0.15;         // s, first-order actuation lag
  double dt = 0.02;              // s, 50 Hz control period
  double l_min = -12.0;          // mm, actuator box
  double l_max = 12.0;
  double v_max = 100.0;          // mm/s per motor
  double meas_noise_pos = 0.02;  // mm, per position axis
  double meas_noise_ori = 5e-4;  // rad, per Euler axis

  void validate() const;
  double total_length() const { return section_lengths.sum(); }
};

struct PlantState {
  Eigen::VectorXd l_cmd = Eigen::VectorXd::Zero(kNumMotors);   // processed commands
  Eigen::VectorXd q_hys = Eigen::VectorXd::Zero(kNumMotors);   // backlash state
  Eigen::VectorXd q_eff = Eigen::VectorXd::Zero(kNumMotors);   // lagged effective lengths
  Eigen::VectorXd l_prev = Eigen::VectorXd::Zero(kNumMotors);  // for velocity
  Pose6 true_pose;            // noise-free pose of q_eff
  uint64_t noise_seed = 0;
  uint64_t noise_counter = 0;
};

struct PlantStepResult {
  PlantState state;
  Observation obs;
};

// In-plane constant-curvature transform of one section; the theta -> 0 limit
// uses the series form so the transform is continuous across the switch.
Eigen::Isometry3d section_transform(double q1, double q2, double q3,
                                    double length, double pitch_radius);

Pose6 forward_kinematics(const Eigen::VectorXd& q_eff, const PlantConfig& cfg);

// Neutral (straight) state plus its first observation.
PlantStepResult reset_plant(const PlantConfig& cfg, uint64_t noise_seed);

// Pure transition: clips and rate-limits the command, advances backlash and
// lag, rebuilds the observation. Measurement noise is drawn from the state's
// counter stream so the function stays deterministic.
PlantStepResult plant_step(const PlantState& state, const Eigen::VectorXd& action,
                           const PlantConfig& cfg);

// Bounded smoothed-noise command generator used for offline data collection.
struct ExcitationConfig {
  double vel_std = 35.0;       // mm/s, stationary velocity scale
  double vel_rho = 0.97;       // per-step velocity smoothing
  double retarget_prob = 0.004;  // chance per step of re-drawing a velocity
};

Dataset collect_dataset(const PlantConfig& cfg, const ExcitationConfig& exc,
                        int n_trajectories, int steps, uint64_t seed);

}  // namespace tdcr
