#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "tdcr/core_math.hpp"
#include "tdcr/rng.hpp"

namespace tdcr {

using Vec6 = Eigen::Matrix<double, 6, 1>;

// Bounds for the multi-scale reference perturbations: constant bias,
// harmonic drift, and a masked random walk, plus the mixing mask that blends
// tracking and static-setpoint behavior.
struct AugmentConfig {
  Vec6 bias_max;       // A_b, mm / rad per pose dimension
  Vec6 sine_amp_max;   // A_s,max
  double sine_freq_max = 0.25;  // f_max, Hz
  double step_prob = 0.001;     // p_step
  Vec6 walk_step_max;  // A_w
  double hold_prob = 0.5;       // probability a pose dimension holds T_t
  double dt = 0.02;             // control period, converts Hz to per-step phase

  AugmentConfig();
  void validate() const;
};

// Per-rollout frozen noise parameters. perturbation_at is a pure function of
// (params, index): the random-walk stream is counter-based, keyed by
// (walk_seed, dimension, step index).
struct AugmentParams {
  Vec6 bias = Vec6::Zero();
  Vec6 sine_amp = Vec6::Zero();
  Vec6 sine_freq = Vec6::Zero();   // Hz
  Vec6 sine_phase = Vec6::Zero();  // [0, 2pi)
  Vec6 mix_mask = Vec6::Ones();    // M: 1 track, 0 hold
  Vec6 walk_step_max = Vec6::Zero();
  double step_prob = 0.0;
  double dt = 0.02;
  uint64_t walk_seed = 0;
};

AugmentParams sample_augment_params(const AugmentConfig& cfg, RandomStream& rng);

// Total perturbation delta_total(i) = bias + sine(i) + masked walk sum over
// k = 0..i. Deterministic for fixed params, any query order.
Vec6 perturbation_at(const AugmentParams& params, int index);

// ground_truth[0] must be T_t; ground_truth[i] is T_{t+i}. Returns the
// augmented references T*_{t+1} .. T*_{t+count}: mixing-mask blend of the
// future pose with T_t, plus delta_total(i); orientation components wrapped
// back into (-pi, pi].
std::vector<Pose6> build_reference(const std::vector<Pose6>& ground_truth,
                                   const AugmentParams& params, int count);

}  // namespace tdcr
