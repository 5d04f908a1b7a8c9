#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "tdcr/checkpoint.hpp"
#include "tdcr/errors.hpp"
#include "tdcr/plant.hpp"
#include "tdcr/surrogate.hpp"

using namespace tdcr;
namespace fs = std::filesystem;

namespace {

SurrogateModel tiny_model(uint64_t seed, int width = 8) {
  SurrogateArch arch;
  arch.layers = 2;
  arch.width = width;
  arch.head_hidden = 8;
  arch.dropout = 0.0;
  SurrogateModel model;
  model.params = init_surrogate_params(arch, seed);
  model.obs_std = Standardizer(Eigen::VectorXd::Zero(kObsDim),
                               Eigen::VectorXd::Ones(kObsDim));
  model.act_std = Standardizer(Eigen::VectorXd::Zero(kNumMotors),
                               Eigen::VectorXd::Ones(kNumMotors));
  return model;
}

Observation random_obs(RandomStream& rng) {
  Observation o;
  for (int i = 0; i < kNumMotors; ++i) {
    o.l[i] = rng.uniform(-5.0, 5.0);
    o.v[i] = rng.uniform(-20.0, 20.0);
  }
  o.pose.p << rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(250, 300);
  o.pose.phi << rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3);
  return o;
}

}  // namespace

TEST_CASE("zero weights: transition gives tanh(ln_bias) regardless of input") {
  SurrogateModel model = tiny_model(1);
  for (auto& cell : model.params.cells) {
    cell.w_in.setZero();
    cell.w_rec.setZero();
    cell.b.setZero();
    cell.ln_bias.setConstant(0.37);
  }
  RandomStream rng(2);
  HiddenState h0 = zero_hidden(model.params.arch);
  HiddenState a = transition(model, h0, random_obs(rng).flat(),
                             Eigen::VectorXd::Zero(kNumMotors));
  HiddenState b = transition(model, h0, random_obs(rng).flat(),
                             Eigen::VectorXd::Ones(kNumMotors));
  for (size_t l = 0; l < a.size(); ++l) {
    CHECK((a[l] - b[l]).norm() == 0.0);
    CHECK(a[l][0] == doctest::Approx(std::tanh(0.37)));
  }
}

TEST_CASE("transition is deterministic") {
  SurrogateModel model = tiny_model(3);
  RandomStream rng(4);
  const Observation o = random_obs(rng);
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(kNumMotors, 0.5);
  HiddenState h0 = zero_hidden(model.params.arch);
  HiddenState a = transition(model, h0, o.flat(), u);
  HiddenState b = transition(model, h0, o.flat(), u);
  for (size_t l = 0; l < a.size(); ++l) CHECK((a[l] - b[l]).norm() == 0.0);
}

TEST_CASE("zero head weights: prediction is the identity") {
  SurrogateModel model = tiny_model(5);
  for (auto& w : model.params.head_w) w.setZero();
  for (auto& b : model.params.head_b) b.setZero();
  RandomStream rng(6);
  const Observation o = random_obs(rng);
  HiddenState h = transition(model, zero_hidden(model.params.arch), o.flat(),
                             Eigen::VectorXd::Zero(kNumMotors));
  const Eigen::VectorXd pred = predict_observation(model, o.flat(), h);
  CHECK((pred - o.flat()).norm() == doctest::Approx(0.0));
}

TEST_CASE("residual structure: prediction minus input equals the head output") {
  SurrogateModel model = tiny_model(7);
  RandomStream rng(8);
  const Observation o = random_obs(rng);
  HiddenState h = transition(model, zero_hidden(model.params.arch), o.flat(),
                             Eigen::VectorXd::Zero(kNumMotors));
  const Eigen::VectorXd pred = predict_observation(model, o.flat(), h);

  // head output computed directly
  ad::Tape tape;
  TapeSurrogate net = lift_surrogate(tape, model.params, false);
  const Eigen::MatrixXd delta =
      tape.value(surrogate_head(tape, net, tape.input(h.back(), false)));
  const Eigen::VectorXd residual =
      model.obs_std.transform(pred) - model.obs_std.transform(o.flat());
  CHECK((residual - delta).norm() < 1e-12);

  // the residual depends only on h: perturbing the pose channels of o with h
  // held fixed shifts the prediction by exactly the same perturbation
  Eigen::VectorXd perturbed = o.flat();
  perturbed.segment<6>(kPoseOffset).array() += 0.5;
  const Eigen::VectorXd pred2 = predict_observation(model, perturbed, h);
  CHECK(((pred2 - pred) - (perturbed - o.flat())).norm() < 1e-12);
}

TEST_CASE("transition gradient vs finite differences") {
  SurrogateArch arch;
  arch.layers = 2;
  arch.width = 6;
  arch.head_hidden = 0;
  arch.dropout = 0.0;
  SurrogateParams params = init_surrogate_params(arch, 11);
  RandomStream rng(12);
  const Eigen::VectorXd o = Eigen::VectorXd::NullaryExpr(
      kObsDim, [&](Eigen::Index) { return rng.uniform(-1.0, 1.0); });
  const Eigen::VectorXd u = Eigen::VectorXd::NullaryExpr(
      kNumMotors, [&](Eigen::Index) { return rng.uniform(-1.0, 1.0); });

  std::vector<Eigen::MatrixXd> flat;
  params.visit([&](const std::string&, Eigen::MatrixXd& m) { flat.push_back(m); });

  auto build = [&](ad::Tape& tape, const std::vector<ad::Value>& p) {
    size_t idx = 0;
    TapeSurrogate net;
    net.arch = arch;
    for (size_t c = 0; c < params.cells.size(); ++c) {
      TapeRnnLayer cell;
      cell.w_in = p[idx++];
      cell.w_rec = p[idx++];
      cell.b = p[idx++];
      cell.ln_gain = p[idx++];
      cell.ln_bias = p[idx++];
      net.cells.push_back(cell);
    }
    net.head_w.push_back(p[idx++]);
    net.head_b.push_back(p[idx++]);
    std::vector<ad::Value> h;
    for (int l = 0; l < arch.layers; ++l)
      h.push_back(tape.input(Eigen::VectorXd::Zero(arch.width), false));
    auto h1 = surrogate_transition(tape, net, h, tape.input(o, false),
                                   tape.input(u, false));
    // include the head so its parameters take part
    ad::Value delta = surrogate_head(tape, net, h1.back());
    std::vector<ad::Value> cat = h1;
    cat.push_back(delta);
    return tape.sum(tape.concat_rows(cat));
  };
  ad::GradCheckResult r = ad::check_gradient(build, flat, 1e-5);
  CHECK(r.max_rel_error < 1e-6);
}

TEST_CASE("rollout basics") {
  SurrogateModel model = tiny_model(13);
  RandomStream rng(14);
  const Observation o = random_obs(rng);
  HiddenState h0 = zero_hidden(model.params.arch);

  // zero-length action sequence -> empty output
  CHECK(rollout(model, h0, o.flat(), {}).empty());

  // 1-step rollout equals transition + predict
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(kNumMotors, 0.3);
  auto seq = rollout(model, h0, o.flat(), {u});
  REQUIRE(seq.size() == 1);
  HiddenState h1 = transition(model, h0, o.flat(), u);
  const Eigen::VectorXd direct = predict_observation(model, o.flat(), h1);
  CHECK((seq[0] - direct).norm() < 1e-12);
}

TEST_CASE("training on a constant-pose dataset drives the loss to zero") {
  // A plant held at a fixed command produces near-constant observations; the
  // residual head only has to learn "no change".
  PlantConfig cfg;
  cfg.meas_noise_pos = 0.0;
  cfg.meas_noise_ori = 0.0;
  PlantStepResult cur = reset_plant(cfg, 0);
  const int steps = 220;
  Trajectory traj;
  traj.observations.resize(steps, kObsDim);
  traj.actions.resize(steps, kNumMotors);
  Eigen::VectorXd cmd = Eigen::VectorXd::Constant(kNumMotors, 2.0);
  for (int t = 0; t < 200; ++t) cur = plant_step(cur.state, cmd, cfg);  // settle
  for (int t = 0; t < steps; ++t) {
    traj.observations.row(t) = cur.obs.flat().transpose();
    traj.actions.row(t) = cmd.transpose();
    cur = plant_step(cur.state, cmd, cfg);
  }
  Dataset ds;
  ds.trajectories.push_back(traj);

  SurrogateTrainConfig tc;
  tc.arch.layers = 1;
  tc.arch.width = 16;
  tc.arch.head_hidden = 0;
  tc.arch.dropout = 0.0;
  tc.epochs = 8;
  tc.windows_per_epoch = 64;
  tc.batch = 8;
  tc.warmup = 4;
  tc.k_max = 1;
  tc.seed = 5;
  SurrogateTrainReport report;
  SurrogateModel model = train_surrogate(ds, tc, &report);
  CHECK(report.epoch_loss.back() < 1e-4);
}

TEST_CASE("same seed gives identical loss curves") {
  PlantConfig cfg;
  ExcitationConfig exc;
  Dataset ds = collect_dataset(cfg, exc, 2, 300, 21);
  SurrogateTrainConfig tc;
  tc.arch.layers = 1;
  tc.arch.width = 8;
  tc.arch.head_hidden = 0;
  tc.epochs = 3;
  tc.windows_per_epoch = 32;
  tc.batch = 8;
  tc.warmup = 4;
  tc.k_max = 2;
  tc.seed = 9;
  SurrogateTrainReport a, b;
  train_surrogate(ds, tc, &a);
  train_surrogate(ds, tc, &b);
  REQUIRE(a.epoch_loss.size() == b.epoch_loss.size());
  for (size_t i = 0; i < a.epoch_loss.size(); ++i) {
    CHECK(a.epoch_loss[i] == b.epoch_loss[i]);
    CHECK(a.epoch_train_loss[i] == b.epoch_train_loss[i]);
  }
}

TEST_CASE("checkpoint round trip preserves parameters and standardizers") {
  SurrogateModel model = tiny_model(31);
  model.obs_std = Standardizer(Eigen::VectorXd::Constant(kObsDim, 1.5),
                               Eigen::VectorXd::Constant(kObsDim, 2.5));
  const std::string path =
      (fs::temp_directory_path() / "tdcr_surrogate.ckpt").string();
  save_surrogate(model, path);
  SurrogateModel back = load_surrogate(path);
  CHECK(back.params.arch.layers == model.params.arch.layers);
  CHECK((back.obs_std.mean() - model.obs_std.mean()).norm() == 0.0);
  std::vector<const Eigen::MatrixXd*> a, b;
  model.params.visit([&](const std::string&, const Eigen::MatrixXd& m) { a.push_back(&m); });
  back.params.visit([&](const std::string&, const Eigen::MatrixXd& m) { b.push_back(&m); });
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK((*a[i] - *b[i]).norm() == 0.0);
  fs::remove(path);
}

TEST_CASE("wrong role checkpoint is rejected") {
  SurrogateModel model = tiny_model(33);
  const std::string path = (fs::temp_directory_path() / "tdcr_role.ckpt").string();
  save_surrogate(model, path);
  Checkpoint ckpt = load_checkpoint(path);
  ckpt.role = "policy";
  save_checkpoint(ckpt, path);
  CHECK_THROWS_AS(load_surrogate(path), Error);
  fs::remove(path);
}
