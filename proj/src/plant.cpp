#include "tdcr/plant.hpp"

#include <cmath>

#include "tdcr/errors.hpp"
#include "tdcr/rng.hpp"

namespace tdcr {

double counter_normal(uint64_t seed, uint64_t counter) {
  const double u1 = 1.0 - counter_uniform01(seed, 2 * counter);      // (0, 1]
  const double u2 = counter_uniform01(seed, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

void PlantConfig::validate() const {
  if (dt <= 0.0 || lag_tau <= 0.0 || backlash_width < 0.0 || pitch_radius <= 0.0)
    fail(ErrorKind::invalid_argument, "plant config: dt, tau, r_d must be > 0 and w >= 0");
  if ((section_lengths.array() <= 0.0).any())
    fail(ErrorKind::invalid_argument, "plant config: section lengths must be > 0");
  if (v_max <= 0.0)
    fail(ErrorKind::invalid_argument, "plant config: v_max must be > 0");
  if (l_min >= l_max)
    fail(ErrorKind::invalid_argument, "plant config: l_min must be < l_max");
  if (meas_noise_pos < 0.0 || meas_noise_ori < 0.0)
    fail(ErrorKind::invalid_argument, "plant config: measurement noise must be >= 0");
}

Eigen::Isometry3d section_transform(double q1, double q2, double q3,
                                    double length, double pitch_radius) {
  const double dx = q1 - 0.5 * (q2 + q3);
  const double dy = (std::sqrt(3.0) / 2.0) * (q2 - q3);
  const double theta = std::hypot(dx, dy) / pitch_radius;
  const double beta = std::atan2(dy, dx);

  // (1-cos)/theta and sin/theta with series guards near zero.
  double f1, f2;
  if (theta < 1e-7) {
    f1 = theta / 2.0;
    f2 = 1.0 - theta * theta / 6.0;
  } else {
    f1 = (1.0 - std::cos(theta)) / theta;
    f2 = std::sin(theta) / theta;
  }

  Eigen::Isometry3d arc = Eigen::Isometry3d::Identity();
  arc.linear() = Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitY()).toRotationMatrix();
  arc.translation() = Eigen::Vector3d(length * f1, 0.0, length * f2);

  const Eigen::Isometry3d rz_pos(Eigen::AngleAxisd(beta, Eigen::Vector3d::UnitZ()));
  const Eigen::Isometry3d rz_neg(Eigen::AngleAxisd(-beta, Eigen::Vector3d::UnitZ()));
  return rz_pos * arc * rz_neg;
}

Pose6 forward_kinematics(const Eigen::VectorXd& q_eff, const PlantConfig& cfg) {
  if (q_eff.size() != kNumMotors)
    fail(ErrorKind::invalid_argument, "forward_kinematics expects 9 tendon displacements");
  if (!q_eff.allFinite())
    fail(ErrorKind::numeric, "forward_kinematics: non-finite tendon displacements");
  Eigen::Isometry3d tip = Eigen::Isometry3d::Identity();
  for (int s = 0; s < 3; ++s) {
    tip = tip * section_transform(q_eff[3 * s], q_eff[3 * s + 1], q_eff[3 * s + 2],
                                  cfg.section_lengths[s], cfg.pitch_radius);
  }
  Pose6 pose;
  pose.p = tip.translation();
  pose.phi = euler_from_rotation(tip.linear());
  return pose;
}

namespace {

Observation build_observation(const PlantState& state, const PlantConfig& cfg,
                              uint64_t noise_base) {
  Observation obs;
  obs.l = state.l_cmd;
  obs.v = (state.l_cmd - state.l_prev) / cfg.dt;
  obs.pose = state.true_pose;
  if (cfg.meas_noise_pos > 0.0 || cfg.meas_noise_ori > 0.0) {
    for (int i = 0; i < 3; ++i) {
      obs.pose.p[i] += cfg.meas_noise_pos * counter_normal(state.noise_seed, noise_base + i);
      obs.pose.phi[i] += cfg.meas_noise_ori * counter_normal(state.noise_seed, noise_base + 3 + i);
    }
    obs.pose.phi = wrap_angles(obs.pose.phi);
  }
  return obs;
}

}  // namespace

PlantStepResult reset_plant(const PlantConfig& cfg, uint64_t noise_seed) {
  cfg.validate();
  PlantStepResult out;
  out.state.noise_seed = noise_seed;
  out.state.true_pose = forward_kinematics(out.state.q_eff, cfg);
  out.obs = build_observation(out.state, cfg, 0);
  out.state.noise_counter = 6;
  return out;
}

PlantStepResult plant_step(const PlantState& state, const Eigen::VectorXd& action,
                           const PlantConfig& cfg) {
  if (action.size() != kNumMotors)
    fail(ErrorKind::invalid_argument, "plant_step expects a 9-vector action");
  if (!action.allFinite())
    fail(ErrorKind::numeric, "plant_step: non-finite action");
  if (state.l_cmd.size() != kNumMotors || state.q_eff.size() != kNumMotors)
    fail(ErrorKind::invalid_argument, "plant_step: state/config mismatch");

  PlantStepResult out;
  PlantState& next = out.state;
  next = state;

  const double max_delta = cfg.v_max * cfg.dt;
  const Eigen::VectorXd clipped = action.cwiseMax(cfg.l_min).cwiseMin(cfg.l_max);
  next.l_prev = state.l_cmd;
  next.l_cmd = state.l_cmd +
               (clipped - state.l_cmd).cwiseMax(-max_delta).cwiseMin(max_delta);

  // Backlash play: the tendon-side state can sit anywhere within +/- w of the
  // command and only moves once the command drags it past the band edge.
  next.q_hys = state.q_hys.array()
                   .max(next.l_cmd.array() - cfg.backlash_width)
                   .min(next.l_cmd.array() + cfg.backlash_width)
                   .matrix();

  const double alpha = std::min(cfg.dt / cfg.lag_tau, 1.0);
  next.q_eff = state.q_eff + alpha * (next.q_hys - state.q_eff);

  next.true_pose = forward_kinematics(next.q_eff, cfg);
  out.obs = build_observation(next, cfg, state.noise_counter);
  next.noise_counter = state.noise_counter + 6;
  return out;
}

Dataset collect_dataset(const PlantConfig& cfg, const ExcitationConfig& exc,
                        int n_trajectories, int steps, uint64_t seed) {
  cfg.validate();
  if (n_trajectories <= 0 || steps <= 0)
    fail(ErrorKind::invalid_argument, "collect_dataset: counts must be positive");

  Dataset ds;
  ds.dt = cfg.dt;
  ds.trajectories.reserve(n_trajectories);
  for (int traj = 0; traj < n_trajectories; ++traj) {
    RandomStream rng(derive_seed(seed, "excitation", traj));
    PlantStepResult cur = reset_plant(cfg, derive_seed(seed, "measurement", traj));

    Trajectory record;
    record.session_id = static_cast<uint64_t>(traj);
    record.observations.resize(steps, kObsDim);
    record.actions.resize(steps, kNumMotors);

    Eigen::VectorXd command = cur.state.l_cmd;
    Eigen::VectorXd velocity(kNumMotors);
    for (int m = 0; m < kNumMotors; ++m)
      velocity[m] = rng.normal(0.0, exc.vel_std);

    const double fresh = std::sqrt(1.0 - exc.vel_rho * exc.vel_rho);
    for (int t = 0; t < steps; ++t) {
      for (int m = 0; m < kNumMotors; ++m) {
        if (rng.uniform(0.0, 1.0) < exc.retarget_prob)
          velocity[m] = rng.normal(0.0, exc.vel_std);
        else
          velocity[m] = exc.vel_rho * velocity[m] +
                        fresh * rng.normal(0.0, exc.vel_std);
      }
      command += velocity * cfg.dt;
      for (int m = 0; m < kNumMotors; ++m) {
        if (command[m] < cfg.l_min) { command[m] = cfg.l_min; velocity[m] = std::abs(velocity[m]); }
        if (command[m] > cfg.l_max) { command[m] = cfg.l_max; velocity[m] = -std::abs(velocity[m]); }
      }
      record.observations.row(t) = cur.obs.flat().transpose();
      record.actions.row(t) = command.transpose();
      cur = plant_step(cur.state, command, cfg);
      if (!cur.state.true_pose.finite())
        fail(ErrorKind::divergence,
             "plant diverged in trajectory " + std::to_string(traj) +
                 " at step " + std::to_string(t));
    }
    ds.trajectories.push_back(std::move(record));
  }
  return ds;
}

}  // namespace tdcr
