#include "tdcr/jacobian_controller.hpp"

#include <cmath>

#include "tdcr/errors.hpp"

namespace tdcr {

void JacobianConfig::validate() const {
  if (probe_step <= 0.0 || damping <= 0.0)
    fail(ErrorKind::invalid_argument, "jacobian config: h_J and lambda_d must be > 0");
  if ((weights.array() <= 0.0).any() || (gains.array() <= 0.0).any())
    fail(ErrorKind::invalid_argument, "jacobian config: W and K must be > 0");
  if (refresh_period < 1 || settle_steps < 1)
    fail(ErrorKind::invalid_argument, "jacobian config: periods must be >= 1");
}

namespace {

Pose6 settled_probe_pose(const Backend& at_state, const Eigen::VectorXd& command,
                         int settle_steps) {
  std::unique_ptr<Backend> probe = at_state.clone();
  for (int s = 0; s < settle_steps; ++s) probe->apply(command);
  Pose6 pose = probe->metric_pose();
  if (!pose.finite())
    fail(ErrorKind::numeric, "jacobian probe produced a non-finite pose");
  return pose;
}

Eigen::Matrix<double, 6, 1> pose_difference(const Pose6& a, const Pose6& b) {
  Eigen::Matrix<double, 6, 1> d;
  d.head<3>() = a.p - b.p;
  d.tail<3>() = wrap_angles(a.phi - b.phi);
  return d;
}

}  // namespace

Eigen::Matrix<double, 6, 9> estimate_jacobian(const Backend& at_state,
                                              const JacobianConfig& cfg) {
  cfg.validate();
  const Eigen::VectorXd base = at_state.current_command();
  Eigen::Matrix<double, 6, 9> jac;
  for (int j = 0; j < kNumMotors; ++j) {
    Eigen::VectorXd plus = base, minus = base;
    plus[j] += cfg.probe_step;
    minus[j] -= cfg.probe_step;
    const Pose6 pose_plus = settled_probe_pose(at_state, plus, cfg.settle_steps);
    const Pose6 pose_minus = settled_probe_pose(at_state, minus, cfg.settle_steps);
    jac.col(j) = pose_difference(pose_plus, pose_minus) / (2.0 * cfg.probe_step);
  }
  return jac;
}

Eigen::VectorXd jacobian_control_step(const Pose6& pose, const Pose6& target,
                                      const Eigen::Matrix<double, 6, 1>& target_rate,
                                      const Eigen::Matrix<double, 6, 9>& jac,
                                      const JacobianConfig& cfg) {
  cfg.validate();
  if (!jac.allFinite())
    fail(ErrorKind::numeric, "jacobian_control_step: non-finite Jacobian");
  const Eigen::Matrix<double, 6, 1> err = pose_difference(target, pose);
  const Eigen::Matrix<double, 6, 1> y = target_rate + cfg.gains.cwiseProduct(err);

  const Eigen::VectorXd w_inv = cfg.weights.cwiseInverse();
  Eigen::Matrix<double, 6, 6> gram =
      jac * w_inv.asDiagonal() * jac.transpose() +
      cfg.damping * cfg.damping * Eigen::Matrix<double, 6, 6>::Identity();
  Eigen::LDLT<Eigen::Matrix<double, 6, 6>> solver(gram);
  if (solver.info() != Eigen::Success)
    fail(ErrorKind::numeric, "jacobian_control_step: damped 6x6 solve failed");
  return w_inv.asDiagonal() * jac.transpose() * solver.solve(y);
}

ClosedLoopResult run_jacobian_loop(Backend& backend,
                                   const std::vector<Pose6>& reference, int steps,
                                   const JacobianConfig& cfg, double dt, double v_max,
                                   double l_min, double l_max) {
  if (reference.empty())
    fail(ErrorKind::invalid_argument, "run_jacobian_loop: empty reference");
  if (steps < 0) steps = static_cast<int>(reference.size()) - 1;
  auto ref_at = [&](int i) {
    return reference[std::min<size_t>(i, reference.size() - 1)];
  };

  ClosedLoopResult result;
  Eigen::Matrix<double, 6, 9> jac;
  Eigen::VectorXd command = backend.current_command();
  for (int t = 0; t < steps; ++t) {
    if (t % cfg.refresh_period == 0) jac = estimate_jacobian(backend, cfg);
    const Pose6 target = ref_at(t + 1);
    Eigen::Matrix<double, 6, 1> feedforward =
        pose_difference(ref_at(t + 1), ref_at(t)) / dt;
    Eigen::VectorXd rates = jacobian_control_step(backend.metric_pose(), target,
                                                  feedforward, jac, cfg);
    rates = rates.cwiseMax(-v_max).cwiseMin(v_max);
    command = (command + rates * dt).cwiseMax(l_min).cwiseMin(l_max);
    backend.apply(command);

    const Pose6 achieved = backend.metric_pose();
    if (!achieved.finite()) {
      result.aborted = true;
      result.abort_step = t;
      break;
    }
    auto [pe, oe] = pose_error(achieved, target);
    result.pos_err.push_back(pe);
    result.ori_err.push_back(oe);
    result.executed.push_back(achieved);
    result.reference.push_back(target);
    result.commands.push_back(command);
  }
  return result;
}

}  // namespace tdcr
