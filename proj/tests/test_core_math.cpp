#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "tdcr/core_math.hpp"
#include "tdcr/errors.hpp"
#include "tdcr/rng.hpp"

using namespace tdcr;

TEST_CASE("pose_error identity and symmetry") {
  Pose6 a;
  a.p << 10.0, -4.0, 250.0;
  a.phi << 0.3, -0.2, 1.1;
  auto [pos, ori] = pose_error(a, a);
  CHECK(pos == doctest::Approx(0.0));
  CHECK(ori == doctest::Approx(0.0));

  Pose6 b = a;
  b.p << 12.0, 0.0, 248.0;
  b.phi << -0.1, 0.4, 0.9;
  auto [pab, oab] = pose_error(a, b);
  auto [pba, oba] = pose_error(b, a);
  CHECK(pab == doctest::Approx(pba));
  CHECK(oab == doctest::Approx(oba));
}

TEST_CASE("pose_error 3-4-5 triangle") {
  Pose6 a, b;
  a.p << 3.0, 4.0, 0.0;
  auto [pos, ori] = pose_error(a, b);
  CHECK(pos == doctest::Approx(5.0));
  CHECK(ori == doctest::Approx(0.0));
}

TEST_CASE("pose_error single-axis rotation") {
  Pose6 a, b;
  b.phi << 0.0, 0.0, M_PI / 2.0;
  auto [pos, ori] = pose_error(a, b);
  CHECK(pos == doctest::Approx(0.0));
  CHECK(ori == doctest::Approx(M_PI / 2.0));
}

TEST_CASE("orientation error invariant under 2pi shifts") {
  RandomStream rng(7);
  for (int i = 0; i < 50; ++i) {
    Pose6 a, b;
    for (int d = 0; d < 3; ++d) {
      a.phi[d] = rng.uniform(-M_PI, M_PI);
      b.phi[d] = rng.uniform(-M_PI, M_PI);
    }
    auto [p0, o0] = pose_error(a, b);
    Pose6 shifted = a;
    shifted.phi[i % 3] += 2.0 * M_PI;
    auto [p1, o1] = pose_error(shifted, b);
    CHECK(o1 == doctest::Approx(o0).epsilon(1e-9));
  }
}

TEST_CASE("euler round trip") {
  RandomStream rng(11);
  for (int i = 0; i < 100; ++i) {
    Eigen::Vector3d phi(rng.uniform(-3.0, 3.0), rng.uniform(-1.5, 1.5),
                        rng.uniform(-3.0, 3.0));
    Eigen::Matrix3d r = rotation_from_euler(phi);
    Eigen::Matrix3d r2 = rotation_from_euler(euler_from_rotation(r));
    CHECK((r - r2).norm() < 1e-10);
  }
}

TEST_CASE("standardize basics") {
  Standardizer s(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(2, 2.0));
  Eigen::VectorXd x(2);
  x << 4.0, 0.0;
  Eigen::VectorXd z = s.transform(x);
  CHECK(z[0] == doctest::Approx(2.0));
  CHECK(z[1] == doctest::Approx(0.0));

  // x == mean maps to zero
  Eigen::VectorXd mean(2);
  mean << 5.0, -3.0;
  Standardizer s2(mean, Eigen::VectorXd::Ones(2));
  CHECK(s2.transform(mean).norm() == doctest::Approx(0.0));
}

TEST_CASE("standardize dimension mismatch is a contract violation") {
  Standardizer s(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3));
  CHECK_THROWS_AS(s.transform(Eigen::VectorXd::Zero(4)), Error);
}

TEST_CASE("fit_standardizer population convention") {
  // column {0, 2} -> mean 1, std 1
  Eigen::MatrixXd samples(2, 1);
  samples << 0.0, 2.0;
  Standardizer s = Standardizer::fit(samples);
  CHECK(s.mean()[0] == doctest::Approx(1.0));
  CHECK(s.std()[0] == doctest::Approx(1.0));
}

TEST_CASE("fit_standardizer constant column floors std") {
  Eigen::MatrixXd samples(5, 1);
  samples.setConstant(3.5);
  Standardizer s = Standardizer::fit(samples);
  CHECK(s.mean()[0] == doctest::Approx(3.5));
  CHECK(s.std()[0] == doctest::Approx(kEpsilonStd));
}

TEST_CASE("fit_standardizer empty dataset errors") {
  CHECK_THROWS_AS(Standardizer::fit(Eigen::MatrixXd(0, 3)), Error);
}

TEST_CASE("fit_standardizer two columns are independent") {
  Eigen::MatrixXd samples(3, 2);
  samples << 1.0, 10.0, 2.0, 20.0, 3.0, 30.0;
  Standardizer s = Standardizer::fit(samples);
  CHECK(s.mean()[0] == doctest::Approx(2.0));
  CHECK(s.mean()[1] == doctest::Approx(20.0));
  CHECK(s.std()[1] == doctest::Approx(10.0 * s.std()[0]).epsilon(1e-12));

  // standardized column has empirical mean 0 and std 1
  Eigen::VectorXd col = samples.col(0);
  double m = 0.0, v = 0.0;
  for (int i = 0; i < 3; ++i) m += (col[i] - s.mean()[0]) / s.std()[0];
  m /= 3.0;
  for (int i = 0; i < 3; ++i) {
    const double z = (col[i] - s.mean()[0]) / s.std()[0];
    v += (z - m) * (z - m);
  }
  v /= 3.0;
  CHECK(std::abs(m) < 1e-12);
  CHECK(std::abs(std::sqrt(v) - 1.0) < 1e-12);
}

TEST_CASE("transform then inverse is identity") {
  RandomStream rng(3);
  Eigen::MatrixXd samples(50, 4);
  for (int r = 0; r < 50; ++r)
    for (int c = 0; c < 4; ++c) samples(r, c) = rng.uniform(-5.0, 5.0) * (c + 1);
  Standardizer s = Standardizer::fit(samples);
  for (int r = 0; r < 50; ++r) {
    Eigen::VectorXd x = samples.row(r).transpose();
    Eigen::VectorXd back = s.inverse(s.transform(x));
    CHECK((back - x).norm() < 1e-10 * std::max(1.0, x.norm()));
  }
}

TEST_CASE("observation flatten round trip") {
  Observation o;
  o.l = Eigen::VectorXd::LinSpaced(kNumMotors, -3.0, 3.0);
  o.v = Eigen::VectorXd::LinSpaced(kNumMotors, -9.0, 9.0);
  o.pose.p << 1.0, 2.0, 3.0;
  o.pose.phi << 0.1, 0.2, 0.3;
  Eigen::VectorXd flat = o.flat();
  CHECK(flat.size() == 24);
  Observation back = Observation::from_flat(flat);
  CHECK((back.flat() - flat).norm() == doctest::Approx(0.0));
  CHECK_THROWS_AS(Observation::from_flat(Eigen::VectorXd::Zero(23)), Error);
}
