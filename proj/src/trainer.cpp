#include "tdcr/trainer.hpp"

#include <chrono>
#include <cmath>
#include <iostream>

#include "tdcr/errors.hpp"
#include "tdcr/optim.hpp"

namespace tdcr {

void TrainConfig::validate() const {
  if (n_init < 1 || n_reference < 1 || n_predict < 1)
    fail(ErrorKind::invalid_argument, "train config: N_i, N_r, N_p must be >= 1");
  if (discount <= 0.0 || discount > 1.0)
    fail(ErrorKind::invalid_argument, "train config: discount must be in (0, 1]");
  if (action_weight < 0.0 || ori_weight < 0.0)
    fail(ErrorKind::invalid_argument, "train config: weights must be >= 0");
  if (batch < 1 || iterations < 1 || lr <= 0.0)
    fail(ErrorKind::invalid_argument, "train config: bad optimization schedule");
}

RolloutLossResult rollout_loss(ad::Tape& tape, const TapePolicy& policy,
                               const TapeSurrogate& surrogate_net,
                               const SurrogateModel& surrogate,
                               const PolicyModel& policy_model,
                               const RolloutBatch& batch,
                               const std::optional<AugmentParams>& augment,
                               const TrainConfig& cfg) {
  cfg.validate();
  const int n_p = cfg.n_predict;
  const int n_r = cfg.n_reference;
  const int horizon = n_p + n_r - 1;
  if (static_cast<int>(batch.future_poses.size()) < horizon)
    fail(ErrorKind::invalid_argument,
         "rollout_loss: batch future horizon " +
             std::to_string(batch.future_poses.size()) + " < required " +
             std::to_string(horizon));

  // Reference sequence for the whole rollout, generated once so the noise
  // stays consistent as the look-ahead window slides.
  std::vector<Pose6> refs;
  if (augment) {
    std::vector<Pose6> ground_truth;
    ground_truth.reserve(horizon + 1);
    ground_truth.push_back(batch.pose_start);
    for (int i = 0; i < horizon; ++i) ground_truth.push_back(batch.future_poses[i]);
    refs = build_reference(ground_truth, *augment, horizon);
  } else {
    refs.assign(batch.future_poses.begin(), batch.future_poses.begin() + horizon);
  }

  // Warm-up: recorded pairs through the frozen transition, constants on tape.
  std::vector<ad::Value> h;
  for (int i = 0; i < surrogate.params.arch.layers; ++i)
    h.push_back(tape.input(Eigen::VectorXd::Zero(surrogate.params.arch.width), false));
  for (int j = 0; j < batch.warmup_obs.rows(); ++j) {
    ad::Value o = tape.input(
        surrogate.obs_std.transform(batch.warmup_obs.row(j).transpose()), false);
    ad::Value u = tape.input(
        surrogate.act_std.transform(batch.warmup_actions.row(j).transpose()), false);
    h = surrogate_transition(tape, surrogate_net, h, o, u);
  }

  ad::Value obs = tape.input(surrogate.obs_std.transform(batch.obs_start), false);
  std::vector<ad::Value> policy_hidden;
  for (int i = 0; i < policy.arch.layers; ++i)
    policy_hidden.push_back(tape.input(Eigen::VectorXd::Zero(policy.arch.width), false));
  ad::Value a_prev = tape.input(batch.action_prev, false);  // raw mm

  const Eigen::Matrix<double, 6, 1> pose_sigma =
      surrogate.obs_std.std().segment<6>(kPoseOffset);
  const Eigen::Matrix<double, 6, 1> pose_inv_sigma = pose_sigma.cwiseInverse();
  Eigen::Matrix<double, 6, 1> pose_weights;
  pose_weights << 1.0, 1.0, 1.0, cfg.ori_weight, cfg.ori_weight, cfg.ori_weight;
  const Eigen::VectorXd act_inv_sigma = policy_model.act_std.std().cwiseInverse();
  static const std::vector<bool> ori_mask = {false, false, false, true, true, true};

  ad::Value track_acc, act_acc;
  double lambda_pow = 1.0;
  for (int i = 1; i <= n_p; ++i) {
    // Policy input features at time t+i-1.
    ad::Value pose_raw = pose_from_obs(tape, obs, surrogate.obs_std);
    std::vector<Pose6> window(refs.begin() + (i - 1), refs.begin() + (i - 1 + n_r));
    ad::Value ref_feat = reference_features(tape, window, pose_raw, pose_sigma);
    ad::Value a_prev_std = ad::cmul(
        ad::cadd(a_prev, -policy_model.act_std.mean()), act_inv_sigma);

    PolicyStep step = policy_act(tape, policy, policy_model.delta_a_max, obs,
                                 h, a_prev_std, ref_feat, policy_hidden);
    policy_hidden = step.hidden_next;
    ad::Value a = tape.clip(tape.add(a_prev, step.delta_a), policy_model.l_min,
                            policy_model.l_max);

    // Frozen surrogate advances one step on the policy's action.
    ad::Value a_std = ad::cmul(ad::cadd(a, -policy_model.act_std.mean()), act_inv_sigma);
    h = surrogate_transition(tape, surrogate_net, h, obs, a_std);
    obs = tape.add(obs, surrogate_head(tape, surrogate_net, h.back()));

    // Discounted cost at t+i: standardized pose error plus increment penalty.
    ad::Value pred_pose = pose_from_obs(tape, obs, surrogate.obs_std);
    ad::Value diff = tape.wrap_angle(
        tape.sub(pred_pose, tape.input(refs[i - 1].flat(), false)), ori_mask);
    ad::Value diff_std = ad::cmul(diff, pose_inv_sigma);
    ad::Value track_i = tape.sum(ad::cmul(tape.square(diff_std), pose_weights));
    ad::Value act_i = tape.sum(tape.square(ad::cmul(step.delta_a, act_inv_sigma)));

    track_acc = (i == 1) ? tape.scalar_mul(lambda_pow, track_i)
                         : tape.add(track_acc, tape.scalar_mul(lambda_pow, track_i));
    act_acc = (i == 1) ? tape.scalar_mul(lambda_pow, act_i)
                       : tape.add(act_acc, tape.scalar_mul(lambda_pow, act_i));
    lambda_pow *= cfg.discount;
    a_prev = a;
  }

  RolloutLossResult result;
  const double inv_np = 1.0 / static_cast<double>(n_p);
  result.total = tape.scalar_mul(
      inv_np, tape.add(track_acc, tape.scalar_mul(cfg.action_weight, act_acc)));
  result.tracking = tape.value(track_acc)(0, 0) * inv_np;
  result.action = tape.value(act_acc)(0, 0) * inv_np * cfg.action_weight;
  return result;
}

PolicyModel train_policy(const Dataset& dataset, const SurrogateModel& surrogate,
                         const TrainConfig& cfg, double delta_a_max, double l_min,
                         double l_max, TrainReport* report,
                         std::vector<PolicySnapshot>* snapshots) {
  cfg.validate();
  PolicyModel model;
  PolicyArch arch = cfg.arch;
  arch.n_reference = cfg.n_reference;
  model.params = init_policy_params(arch, surrogate.params.arch, cfg.seed);
  model.surrogate_arch = surrogate.params.arch;
  model.obs_std = surrogate.obs_std;
  model.act_std = surrogate.act_std;
  model.delta_a_max = delta_a_max;
  model.l_min = l_min;
  model.l_max = l_max;

  std::vector<Eigen::MatrixXd*> slots;
  model.params.visit([&](const std::string&, Eigen::MatrixXd& m) { slots.push_back(&m); });
  AdamOptimizer opt(cfg.lr);

  RandomStream batch_rng(derive_seed(cfg.seed, "policy-batch"));
  RandomStream augment_rng(derive_seed(cfg.seed, "policy-augment"));

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Eigen::MatrixXd> grads;
    for (auto* s : slots) grads.push_back(Eigen::MatrixXd::Zero(s->rows(), s->cols()));
    double loss_sum = 0.0, track_sum = 0.0, act_sum = 0.0;
    for (int b = 0; b < cfg.batch; ++b) {
      RolloutBatch batch =
          sample_rollout(dataset, cfg.n_init, cfg.n_predict, cfg.n_reference, batch_rng);
      std::optional<AugmentParams> augment;
      if (cfg.augmentation)
        augment = sample_augment_params(cfg.augment, augment_rng);

      ad::Tape tape;
      TapeSurrogate surrogate_net = lift_surrogate(tape, surrogate.params, false);
      TapePolicy policy_net = lift_policy(tape, model.params, true);
      RolloutLossResult r = rollout_loss(tape, policy_net, surrogate_net, surrogate,
                                         model, batch, augment, cfg);
      const double l = tape.value(r.total)(0, 0);
      if (!std::isfinite(l))
        fail(ErrorKind::divergence,
             "policy training diverged at iteration " + std::to_string(iter));
      loss_sum += l;
      track_sum += r.tracking;
      act_sum += r.action;
      tape.backward(r.total);
      int slot = 0;
      auto grab = [&](ad::Value v) { grads[slot++] += tape.adjoint(v); };
      for (auto& cell : policy_net.cells) {
        grab(cell.w_in); grab(cell.w_rec); grab(cell.b);
        grab(cell.ln_gain); grab(cell.ln_bias);
      }
      grab(policy_net.head_w);
      grab(policy_net.head_b);
    }
    for (auto& g : grads) g /= static_cast<double>(cfg.batch);
    opt.step(slots, grads, cfg.grad_clip);

    if (report) {
      report->loss.push_back(loss_sum / cfg.batch);
      report->tracking_cost.push_back(track_sum / cfg.batch);
      report->action_cost.push_back(act_sum / cfg.batch);
      report->grad_norm.push_back(opt.last_grad_norm());
      report->wall_time_s.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    if (cfg.verbose && (iter % 25 == 0 || iter + 1 == cfg.iterations))
      std::cout << "policy iter " << iter << " loss=" << loss_sum / cfg.batch << "\n";

    if (snapshots)
      for (int snap : cfg.snapshot_iterations)
        if (snap == iter + 1) snapshots->push_back({iter + 1, model});
  }
  return model;
}

}  // namespace tdcr
