#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "tdcr/errors.hpp"
#include "tdcr/ref_augment.hpp"

using namespace tdcr;

TEST_CASE("zero bounds give all-zero params") {
  AugmentConfig cfg;
  cfg.bias_max.setZero();
  cfg.sine_amp_max.setZero();
  cfg.sine_freq_max = 0.0;
  cfg.walk_step_max.setZero();
  cfg.step_prob = 0.0;
  cfg.hold_prob = 0.0;
  RandomStream rng(1);
  AugmentParams p = sample_augment_params(cfg, rng);
  CHECK(p.bias.norm() == 0.0);
  CHECK(p.sine_amp.norm() == 0.0);
  CHECK((p.mix_mask - Vec6::Ones()).norm() == 0.0);
  for (int i = 0; i < 20; ++i) CHECK(perturbation_at(p, i).norm() == 0.0);
}

TEST_CASE("bias draws stay in bounds with near-zero mean") {
  AugmentConfig cfg;
  RandomStream rng(5);
  double sum = 0.0, max_abs = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    AugmentParams p = sample_augment_params(cfg, rng);
    sum += p.bias[0];
    max_abs = std::max(max_abs, std::abs(p.bias[0]));
    CHECK(std::abs(p.bias[0]) <= 20.0);
    CHECK(p.sine_amp[0] >= 0.0);
    CHECK(p.sine_amp[0] <= 25.0);
    CHECK(p.sine_freq[0] >= 0.0);
    CHECK(p.sine_freq[0] <= 0.25);
    CHECK(p.sine_phase[0] >= 0.0);
    CHECK(p.sine_phase[0] < 2.0 * M_PI);
  }
  // 3 sigma of the mean of U(-20, 20) over 1e4 draws is ~0.35
  CHECK(std::abs(sum / draws) < 0.6);
  CHECK(max_abs <= 20.0);
}

TEST_CASE("fixed seed reproduces params") {
  AugmentConfig cfg;
  RandomStream a(9), b(9);
  AugmentParams pa = sample_augment_params(cfg, a);
  AugmentParams pb = sample_augment_params(cfg, b);
  CHECK((pa.bias - pb.bias).norm() == 0.0);
  CHECK((pa.sine_phase - pb.sine_phase).norm() == 0.0);
  CHECK(pa.walk_seed == pb.walk_seed);
}

TEST_CASE("constant component only") {
  AugmentParams p;
  p.bias << 3.0, -1.0, 0.5, 0.01, -0.02, 0.03;
  for (int i = 0; i < 50; ++i)
    CHECK((perturbation_at(p, i) - p.bias).norm() == 0.0);
}

TEST_CASE("pure harmonic is exactly periodic") {
  AugmentParams p;
  p.sine_amp[0] = 2.0;
  p.dt = 0.02;
  p.sine_freq[0] = 0.05 / p.dt;  // per-step frequency 0.05 -> period 20 steps
  for (int i = 0; i < 40; ++i) {
    const double expect = 2.0 * std::sin(2.0 * M_PI * 0.05 * i);
    CHECK(perturbation_at(p, i)[0] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(perturbation_at(p, i + 20)[0] ==
          doctest::Approx(perturbation_at(p, i)[0]).epsilon(1e-9));
  }
}

TEST_CASE("harmonic zero mean over one period") {
  AugmentParams p;
  p.sine_amp[1] = 5.0;
  p.dt = 0.02;
  p.sine_freq[1] = 0.04 / p.dt;  // period 25 steps
  p.sine_phase[1] = 1.234;
  double mean = 0.0;
  for (int i = 0; i < 25; ++i) mean += perturbation_at(p, i)[1];
  CHECK(std::abs(mean / 25.0) < 1e-9);
}

TEST_CASE("deterministic walk with p_step = 1 and degenerate magnitude") {
  AugmentParams p;
  p.step_prob = 1.0;
  p.walk_step_max[2] = 0.0;  // U(-0, 0) on other dims
  // degenerate U(c, c): force by zero width around c via direct stream check
  // use a one-sided bound: U(-A, A) with A = 0 is always 0; instead emulate
  // U(c, c) by setting A and checking the cumulative count scaling on dim 0.
  p.walk_step_max[0] = 4.0;
  p.walk_seed = 42;
  // delta_step(i) must be the prefix sum of i+1 identical-stream draws
  Vec6 prev = Vec6::Zero();
  double last = 0.0;
  for (int i = 0; i < 30; ++i) {
    const Vec6 d = perturbation_at(p, i);
    const double step_i = d[0] - last;
    CHECK(std::abs(step_i) <= 4.0);
    last = d[0];
    prev = d;
  }
  // p_step = 1, U(c, c) via equal bounds is exercised with A = 0: (i+1)*0 = 0
  AugmentParams q;
  q.step_prob = 1.0;
  q.walk_step_max.setZero();
  for (int i = 0; i < 10; ++i) CHECK(perturbation_at(q, i).norm() == 0.0);
}

TEST_CASE("walk accumulates (i+1) masked terms") {
  // With p_step = 1 every index contributes one draw; check additivity:
  // delta(i) - delta(i-1) equals the i-th draw, and draws are index-keyed
  // (the same index yields the same draw in any query order).
  AugmentParams p;
  p.step_prob = 1.0;
  p.walk_step_max[0] = 2.0;
  p.walk_seed = 7;
  std::vector<double> forward(20);
  for (int i = 0; i < 20; ++i) forward[i] = perturbation_at(p, i)[0];
  for (int i = 19; i >= 1; --i) {
    const double inc = forward[i] - forward[i - 1];
    // re-query out of order; must match bit-for-bit
    CHECK(perturbation_at(p, i)[0] - perturbation_at(p, i - 1)[0] == inc);
  }
}

TEST_CASE("sliding-window consistency") {
  AugmentConfig cfg;
  RandomStream rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    AugmentParams p = sample_augment_params(cfg, rng);
    const int base = trial % 50;
    // query the same absolute index from two different "windows"
    const Vec6 a = perturbation_at(p, base + 7);
    for (int again = 0; again < 3; ++again) {
      const Vec6 b = perturbation_at(p, base + 7);
      CHECK((a - b).norm() == 0.0);
    }
  }
}

TEST_CASE("bound without the walk component") {
  AugmentConfig cfg;
  cfg.step_prob = 0.0;
  RandomStream rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    AugmentParams p = sample_augment_params(cfg, rng);
    for (int i = 0; i < 100; i += 7) {
      const Vec6 d = perturbation_at(p, i);
      for (int dim = 0; dim < 6; ++dim)
        CHECK(std::abs(d[dim]) <= cfg.bias_max[dim] + cfg.sine_amp_max[dim] + 1e-12);
    }
  }
}

TEST_CASE("step-rate statistics over many draws") {
  AugmentParams p;
  p.step_prob = 0.001;
  p.walk_step_max[0] = 1.0;
  p.walk_seed = 1234;
  // count mask hits over 1e6 indices using the increment trick
  const uint64_t mask_stream = mix_seed(p.walk_seed, 0);
  int hits = 0;
  const int n = 1000000;
  for (int k = 0; k < n; ++k)
    if (counter_uniform01(mask_stream, k) < p.step_prob) ++hits;
  const double rate = hits / static_cast<double>(n);
  CHECK(rate >= 0.0007);
  CHECK(rate <= 0.0013);
}

TEST_CASE("build_reference mixing and bias") {
  std::vector<Pose6> gt(11);
  for (int i = 0; i <= 10; ++i) {
    gt[i].p << i * 1.0, 0.0, 200.0;
    gt[i].phi << 0.0, 0.0, 0.1 * i;
  }
  // M = 1, all noise zero: references equal ground-truth futures
  {
    AugmentParams p;
    std::vector<Pose6> refs = build_reference(gt, p, 10);
    REQUIRE(refs.size() == 10);
    for (int i = 0; i < 10; ++i)
      CHECK((refs[i].flat() - gt[i + 1].flat()).norm() == 0.0);
  }
  // M = 0: every reference pinned to T_t
  {
    AugmentParams p;
    p.mix_mask.setZero();
    std::vector<Pose6> refs = build_reference(gt, p, 10);
    for (int i = 0; i < 10; ++i)
      CHECK((refs[i].flat() - gt[0].flat()).norm() == 0.0);
  }
  // pure +5 mm x bias
  {
    AugmentParams p;
    p.bias[0] = 5.0;
    std::vector<Pose6> refs = build_reference(gt, p, 10);
    for (int i = 0; i < 10; ++i) {
      CHECK(refs[i].p.x() == doctest::Approx(gt[i + 1].p.x() + 5.0));
      CHECK(refs[i].p.y() == doctest::Approx(gt[i + 1].p.y()));
    }
  }
  // horizon too short
  {
    AugmentParams p;
    CHECK_THROWS_AS(build_reference(gt, p, 11), Error);
  }
}

TEST_CASE("orientation perturbations re-wrap into (-pi, pi]") {
  std::vector<Pose6> gt(3);
  gt[1].phi << 3.0, 0.0, 0.0;
  gt[2].phi << 3.0, 0.0, 0.0;
  AugmentParams p;
  p.bias[3] = 0.1;  // wraps 3.1 + 0.1 next to pi
  p.bias[3] = 0.5;  // 3.5 > pi wraps negative
  std::vector<Pose6> refs = build_reference(gt, p, 2);
  for (const auto& r : refs) {
    CHECK(r.phi.x() <= M_PI);
    CHECK(r.phi.x() > -M_PI);
    CHECK(r.phi.x() == doctest::Approx(3.5 - 2.0 * M_PI));
  }
}
