#include "tdcr/ref_augment.hpp"

#include <cmath>

#include "tdcr/errors.hpp"

namespace tdcr {

AugmentConfig::AugmentConfig() {
  bias_max << 20.0, 20.0, 20.0, 0.1, 0.1, 0.1;
  sine_amp_max << 25.0, 25.0, 25.0, 0.1, 0.1, 0.1;
  walk_step_max << 20.0, 20.0, 20.0, 0.1, 0.1, 0.1;
}

void AugmentConfig::validate() const {
  if ((bias_max.array() < 0.0).any() || (sine_amp_max.array() < 0.0).any() ||
      (walk_step_max.array() < 0.0).any() || sine_freq_max < 0.0)
    fail(ErrorKind::invalid_argument, "augment config: bounds must be >= 0");
  if (step_prob < 0.0 || step_prob > 1.0 || hold_prob < 0.0 || hold_prob > 1.0)
    fail(ErrorKind::invalid_argument, "augment config: probabilities must be in [0, 1]");
  if (dt <= 0.0)
    fail(ErrorKind::invalid_argument, "augment config: dt must be > 0");
}

AugmentParams sample_augment_params(const AugmentConfig& cfg, RandomStream& rng) {
  cfg.validate();
  AugmentParams p;
  p.step_prob = cfg.step_prob;
  p.walk_step_max = cfg.walk_step_max;
  p.dt = cfg.dt;
  for (int d = 0; d < 6; ++d) {
    p.bias[d] = rng.uniform(-cfg.bias_max[d], cfg.bias_max[d]);
    p.sine_amp[d] = rng.uniform(0.0, cfg.sine_amp_max[d]);
    p.sine_freq[d] = rng.uniform(0.0, cfg.sine_freq_max);
    p.sine_phase[d] = rng.uniform(0.0, 2.0 * M_PI);
    p.mix_mask[d] = rng.uniform(0.0, 1.0) < cfg.hold_prob ? 0.0 : 1.0;
  }
  p.walk_seed = rng.engine()();
  return p;
}

Vec6 perturbation_at(const AugmentParams& params, int index) {
  if (index < 0)
    fail(ErrorKind::invalid_argument, "perturbation index must be >= 0");
  Vec6 delta = params.bias;
  for (int d = 0; d < 6; ++d) {
    delta[d] += params.sine_amp[d] *
                std::sin(2.0 * M_PI * params.sine_freq[d] * params.dt * index +
                         params.sine_phase[d]);
    if (params.step_prob <= 0.0 || params.walk_step_max[d] == 0.0) continue;
    const uint64_t mask_stream = mix_seed(params.walk_seed, 2 * d);
    const uint64_t mag_stream = mix_seed(params.walk_seed, 2 * d + 1);
    for (int k = 0; k <= index; ++k) {
      if (counter_uniform01(mask_stream, k) < params.step_prob)
        delta[d] += counter_uniform(mag_stream, k, -params.walk_step_max[d],
                                    params.walk_step_max[d]);
    }
  }
  return delta;
}

std::vector<Pose6> build_reference(const std::vector<Pose6>& ground_truth,
                                   const AugmentParams& params, int count) {
  if (count < 0 || static_cast<int>(ground_truth.size()) < count + 1)
    fail(ErrorKind::invalid_argument,
         "reference horizon too short: need " + std::to_string(count + 1) +
             " ground-truth poses, got " + std::to_string(ground_truth.size()));
  const Vec6 base_pose = ground_truth[0].flat();
  std::vector<Pose6> refs;
  refs.reserve(count);
  for (int i = 1; i <= count; ++i) {
    const Vec6 gt = ground_truth[i].flat();
    Vec6 mixed = params.mix_mask.cwiseProduct(gt) +
                 (Vec6::Ones() - params.mix_mask).cwiseProduct(base_pose);
    mixed += perturbation_at(params, i);
    Pose6 ref = Pose6::from_flat(mixed);
    ref.phi = wrap_angles(ref.phi);
    refs.push_back(ref);
  }
  return refs;
}

}  // namespace tdcr
