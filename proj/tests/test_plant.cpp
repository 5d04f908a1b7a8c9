#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "tdcr/errors.hpp"
#include "tdcr/plant.hpp"
#include "tdcr/rng.hpp"

using namespace tdcr;

namespace {

PlantConfig quiet_plant() {
  PlantConfig cfg;
  cfg.meas_noise_pos = 0.0;
  cfg.meas_noise_ori = 0.0;
  return cfg;
}

// Shoelace area of the (command, response) loop.
double loop_area(const std::vector<double>& x, const std::vector<double>& y) {
  double area = 0.0;
  const size_t n = x.size();
  for (size_t i = 0; i < n; ++i) {
    const size_t j = (i + 1) % n;
    area += x[i] * y[j] - x[j] * y[i];
  }
  return std::abs(area) / 2.0;
}

}  // namespace

TEST_CASE("straight configuration") {
  PlantConfig cfg = quiet_plant();
  Pose6 pose = forward_kinematics(Eigen::VectorXd::Zero(9), cfg);
  CHECK((pose.p - Eigen::Vector3d(0, 0, cfg.total_length())).norm() < 1e-9);
  CHECK(pose.phi.norm() < 1e-9);
}

TEST_CASE("single-section quarter-circle bend") {
  // theta = pi/2 in the x-z plane with length 100
  const double r_d = 10.0;
  const double q1 = r_d * M_PI / 2.0;
  Eigen::Isometry3d t = section_transform(q1, 0.0, 0.0, 100.0, r_d);
  const double r = 200.0 / M_PI;
  CHECK(std::abs(t.translation().x() - r) < 1e-9);
  CHECK(std::abs(t.translation().y()) < 1e-9);
  CHECK(std::abs(t.translation().z() - r) < 1e-9);
}

TEST_CASE("tendon slot rotation rotates the tip by 120 degrees") {
  PlantConfig cfg = quiet_plant();
  RandomStream rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd q(9);
    for (int i = 0; i < 9; ++i) q[i] = rng.uniform(-6.0, 6.0);
    Eigen::VectorXd rotated(9);
    for (int s = 0; s < 3; ++s) {
      rotated[3 * s + 0] = q[3 * s + 2];
      rotated[3 * s + 1] = q[3 * s + 0];
      rotated[3 * s + 2] = q[3 * s + 1];
    }
    const Pose6 a = forward_kinematics(q, cfg);
    const Pose6 b = forward_kinematics(rotated, cfg);
    const Eigen::Matrix3d rot =
        Eigen::AngleAxisd(2.0 * M_PI / 3.0, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    CHECK((b.p - rot * a.p).norm() < 1e-6);
  }
}

TEST_CASE("kinematics continuous across the small-angle switch") {
  PlantConfig cfg = quiet_plant();
  // theta = |q1| / r_d; pick q1 so theta straddles 1e-7 by +/- 1e-9
  const double q_at = 1e-7 * cfg.pitch_radius;
  const double dq = 1e-9 * cfg.pitch_radius;
  Eigen::VectorXd lo = Eigen::VectorXd::Zero(9), hi = Eigen::VectorXd::Zero(9);
  lo[0] = q_at - dq;
  hi[0] = q_at + dq;
  const Pose6 a = forward_kinematics(lo, cfg);
  const Pose6 b = forward_kinematics(hi, cfg);
  CHECK((a.p - b.p).norm() < 1e-6);
}

TEST_CASE("workspace bound") {
  PlantConfig cfg = quiet_plant();
  RandomStream rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd q(9);
    for (int i = 0; i < 9; ++i) q[i] = rng.uniform(cfg.l_min, cfg.l_max);
    const Pose6 pose = forward_kinematics(q, cfg);
    CHECK(pose.p.norm() <= cfg.total_length() + 1e-9);
  }
}

TEST_CASE("fixed point under a constant command") {
  PlantConfig cfg = quiet_plant();
  PlantStepResult cur = reset_plant(cfg, 0);
  Eigen::VectorXd cmd(9);
  cmd << 3, -2, 1, 0.5, -0.5, 2, -1, 0, 4;
  Pose6 prev = cur.state.true_pose;
  double last_change = 1e9;
  for (int t = 0; t < 1000; ++t) {
    cur = plant_step(cur.state, cmd, cfg);
    last_change = (cur.state.true_pose.p - prev.p).norm();
    prev = cur.state.true_pose;
  }
  CHECK(last_change < 1e-9);
  // converged observation: velocity zero, lengths at the command
  CHECK((cur.obs.l - cmd).norm() < 1e-9);
  CHECK(cur.obs.v.norm() < 1e-9);
}

TEST_CASE("backlash play bound holds after every step") {
  PlantConfig cfg = quiet_plant();
  RandomStream rng(5);
  PlantStepResult cur = reset_plant(cfg, 0);
  for (int t = 0; t < 500; ++t) {
    Eigen::VectorXd cmd(9);
    for (int i = 0; i < 9; ++i) cmd[i] = rng.uniform(cfg.l_min, cfg.l_max);
    cur = plant_step(cur.state, cmd, cfg);
    CHECK(((cur.state.q_hys - cur.state.l_cmd).cwiseAbs().array() <=
           cfg.backlash_width + 1e-12)
              .all());
  }
}

TEST_CASE("triangular cycle encloses area with backlash, none without") {
  auto run_cycle = [](double w, double tau) {
    PlantConfig cfg = quiet_plant();
    cfg.backlash_width = w;
    cfg.lag_tau = tau;
    PlantStepResult cur = reset_plant(cfg, 0);
    // settle at the lower end first
    Eigen::VectorXd cmd = Eigen::VectorXd::Zero(9);
    for (int t = 0; t < 300; ++t) cur = plant_step(cur.state, cmd, cfg);
    std::vector<double> xs, ys;
    const int half = 200;
    for (int cycle = 0; cycle < 3; ++cycle) {
      for (int t = 0; t < 2 * half; ++t) {
        const double u = t < half ? 8.0 * t / half : 8.0 * (2 * half - t) / half;
        cmd[0] = u;
        cur = plant_step(cur.state, cmd, cfg);
        if (cycle == 2) {  // record the settled cycle
          xs.push_back(cmd[0]);
          ys.push_back(cur.state.q_eff[0]);
        }
      }
    }
    return loop_area(xs, ys);
  };
  // backlash + lag: the loop has strictly positive area
  CHECK(run_cycle(1.5, 0.15) > 0.5);
  // degenerate case: no play, lag as fast as the loop -> response == command
  CHECK(run_cycle(0.0, 0.02) < 1e-9);
}

TEST_CASE("fast lag with zero backlash tracks the command") {
  PlantConfig cfg = quiet_plant();
  cfg.backlash_width = 0.0;
  cfg.lag_tau = cfg.dt;
  PlantStepResult cur = reset_plant(cfg, 0);
  Eigen::VectorXd cmd(9);
  cmd << 1, 2, 3, -1, -2, -3, 0.5, 1.5, -0.5;
  for (int t = 0; t < 50; ++t) cur = plant_step(cur.state, cmd, cfg);
  CHECK((cur.state.q_eff - cmd).norm() < 1e-6);
}

TEST_CASE("path dependence: approaching from above vs below differs") {
  // A uniform approach direction would put the same backlash offset on all
  // tendons of a section, which the curvature map cancels as common mode; an
  // alternating pattern leaves a differential offset that moves the tip.
  PlantConfig cfg = quiet_plant();
  Eigen::VectorXd target(9);
  target << 2, -1, 3, 1, 0, -2, 4, -3, 1;
  Eigen::VectorXd pattern(9);
  pattern << 1, -1, 1, -1, 1, -1, 1, -1, 1;

  auto settle_from = [&](double sign) {
    PlantStepResult cur = reset_plant(cfg, 0);
    Eigen::VectorXd start = target + sign * 5.0 * pattern;
    for (int t = 0; t < 400; ++t) cur = plant_step(cur.state, start, cfg);
    for (int t = 0; t < 400; ++t) cur = plant_step(cur.state, target, cfg);
    return cur.state.true_pose;
  };
  const Pose6 from_above = settle_from(1.0);
  const Pose6 from_below = settle_from(-1.0);
  auto [gap, _] = pose_error(from_above, from_below);
  CHECK(gap > 0.1);  // strictly positive steady-state gap
}

TEST_CASE("plant step rejects bad actions") {
  PlantConfig cfg = quiet_plant();
  PlantStepResult cur = reset_plant(cfg, 0);
  CHECK_THROWS_AS(plant_step(cur.state, Eigen::VectorXd::Zero(5), cfg), Error);
  Eigen::VectorXd nan_cmd = Eigen::VectorXd::Zero(9);
  nan_cmd[4] = std::nan("");
  CHECK_THROWS_AS(plant_step(cur.state, nan_cmd, cfg), Error);
}

TEST_CASE("measurement noise is reproducible and bounded") {
  PlantConfig cfg;
  cfg.meas_noise_pos = 0.02;
  PlantStepResult a = reset_plant(cfg, 99);
  PlantStepResult b = reset_plant(cfg, 99);
  Eigen::VectorXd cmd = Eigen::VectorXd::Constant(9, 1.0);
  for (int t = 0; t < 10; ++t) {
    a = plant_step(a.state, cmd, cfg);
    b = plant_step(b.state, cmd, cfg);
  }
  CHECK((a.obs.flat() - b.obs.flat()).norm() == 0.0);
  CHECK((a.obs.pose.p - a.state.true_pose.p).norm() < 0.5);  // noise is small
  CHECK((a.obs.pose.p - a.state.true_pose.p).norm() > 0.0);  // but present
}

TEST_CASE("collect_dataset determinism and record count") {
  PlantConfig cfg;
  ExcitationConfig exc;
  Dataset a = collect_dataset(cfg, exc, 1, 100, 7);
  Dataset b = collect_dataset(cfg, exc, 1, 100, 7);
  REQUIRE(a.trajectories.size() == 1);
  CHECK(a.trajectories[0].steps() == 100);
  CHECK((a.trajectories[0].observations - b.trajectories[0].observations).norm() == 0.0);
  CHECK((a.trajectories[0].actions - b.trajectories[0].actions).norm() == 0.0);
}

TEST_CASE("excitation covers the actuator box") {
  PlantConfig cfg;
  ExcitationConfig exc;
  Dataset ds = collect_dataset(cfg, exc, 6, 1500, 11);
  for (int m = 0; m < kNumMotors; ++m) {
    double lo = 1e9, hi = -1e9;
    for (const auto& traj : ds.trajectories) {
      lo = std::min(lo, traj.observations.col(m).minCoeff());
      hi = std::max(hi, traj.observations.col(m).maxCoeff());
    }
    CHECK((hi - lo) / (cfg.l_max - cfg.l_min) >= 0.6);
  }
}
