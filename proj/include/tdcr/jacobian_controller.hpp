#pragma once

#include <Eigen/Dense>

#include "tdcr/backend.hpp"
#include "tdcr/core_math.hpp"

namespace tdcr {

// Resolved-rate tracking: u = Jdagger (Tdot* + K (T* - T)) with the damped
// least-squares pseudo-inverse Jdagger = W^-1 J^T (J W^-1 J^T + lambda^2 I)^-1.
struct JacobianConfig {
  double probe_step = 2.5;     // h_J mm; must clear the backlash band
  double damping = 2.0;        // lambda_d
  Eigen::VectorXd weights = Eigen::VectorXd::Ones(kNumMotors);  // W diagonal
  Eigen::Matrix<double, 6, 1> gains =
      Eigen::Matrix<double, 6, 1>::Constant(2.0);  // K diagonal, 1/s
  int refresh_period = 10;  // control steps between Jacobian re-estimates
  int settle_steps = 25;    // quasi-static probe settling

  void validate() const;
};

// Central-difference probe columns through a settled quasi-static push on a
// cloned backend; the controlled trajectory is untouched.
Eigen::Matrix<double, 6, 9> estimate_jacobian(const Backend& at_state,
                                              const JacobianConfig& cfg);

// One resolved-rate step; returns commanded length rates (mm/s).
Eigen::VectorXd jacobian_control_step(const Pose6& pose, const Pose6& target,
                                      const Eigen::Matrix<double, 6, 1>& target_rate,
                                      const Eigen::Matrix<double, 6, 9>& jac,
                                      const JacobianConfig& cfg);

ClosedLoopResult run_jacobian_loop(Backend& backend,
                                   const std::vector<Pose6>& reference, int steps,
                                   const JacobianConfig& cfg, double dt, double v_max,
                                   double l_min, double l_max);

}  // namespace tdcr
