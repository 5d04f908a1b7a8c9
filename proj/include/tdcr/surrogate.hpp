#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tdcr/autodiff.hpp"
#include "tdcr/core_math.hpp"
#include "tdcr/dataset.hpp"

namespace tdcr {

// One tanh recurrent layer with LayerNorm on the pre-activation:
// h' = tanh(LN(w_in x + w_rec h + b)). Vectors are stored as n x 1 matrices
// so parameters can be visited uniformly.
struct RnnLayerParams {
  Eigen::MatrixXd w_in;
  Eigen::MatrixXd w_rec;
  Eigen::MatrixXd b;
  Eigen::MatrixXd ln_gain;
  Eigen::MatrixXd ln_bias;
};

struct SurrogateArch {
  int layers = 2;
  int width = 64;
  int head_hidden = 64;  // 0 -> linear residual head
  double dropout = 0.3;  // inter-layer, surrogate training only
};

struct SurrogateParams {
  SurrogateArch arch;
  std::vector<RnnLayerParams> cells;
  std::vector<Eigen::MatrixXd> head_w;
  std::vector<Eigen::MatrixXd> head_b;

  // Deterministic traversal order shared by the optimizer, checkpoints and
  // gradient checks.
  void visit(const std::function<void(const std::string&, Eigen::MatrixXd&)>& fn);
  void visit(const std::function<void(const std::string&, const Eigen::MatrixXd&)>& fn) const;
};

// Hidden state as plain vectors (one per layer), zero-initialized at
// sequence start.
using HiddenState = std::vector<Eigen::VectorXd>;
HiddenState zero_hidden(const SurrogateArch& arch);

// The dynamics surrogate together with the feature standardizers fitted on
// its training dataset.
struct SurrogateModel {
  SurrogateParams params;
  Standardizer obs_std;  // 24 channels
  Standardizer act_std;  // 9 channels
};

SurrogateParams init_surrogate_params(const SurrogateArch& arch, uint64_t seed);

// ---- tape-side forward graph ----

struct TapeRnnLayer {
  ad::Value w_in, w_rec, b, ln_gain, ln_bias;
};

struct TapeSurrogate {
  std::vector<TapeRnnLayer> cells;
  std::vector<ad::Value> head_w;
  std::vector<ad::Value> head_b;
  SurrogateArch arch;
};

struct DropoutPlan {
  bool enabled = false;
  double rate = 0.0;
  uint64_t seed = 0;
  uint64_t counter = 0;  // advanced per dropout site

  uint64_t next() { return mix_seed(seed, counter++); }
};

TapeSurrogate lift_surrogate(ad::Tape& tape, const SurrogateParams& params,
                             bool requires_grad);

// h_{t+1} = f_theta(h_t, o_t, u_t) on the tape; inputs are standardized.
std::vector<ad::Value> surrogate_transition(ad::Tape& tape, const TapeSurrogate& net,
                                            const std::vector<ad::Value>& hidden,
                                            ad::Value obs_std, ad::Value act_std,
                                            DropoutPlan* dropout = nullptr);

// Residual head g_psi(h_{t+1}), standardized observation delta.
ad::Value surrogate_head(ad::Tape& tape, const TapeSurrogate& net,
                         ad::Value hidden_last);

// ---- plain (non-tape) inference ----

// One transition + residual prediction step on raw (unstandardized) data.
struct SurrogateStep {
  HiddenState hidden;
  Eigen::VectorXd obs;  // predicted flat observation, raw units
};

HiddenState transition(const SurrogateModel& model, const HiddenState& hidden,
                       const Eigen::VectorXd& obs_raw, const Eigen::VectorXd& act_raw);

// o_hat_{t+1} = o_t + g_psi(h_{t+1}), raw units.
Eigen::VectorXd predict_observation(const SurrogateModel& model,
                                    const Eigen::VectorXd& obs_raw,
                                    const HiddenState& hidden_next);

// Auto-regressive rollout fed back on its own predictions.
std::vector<Eigen::VectorXd> rollout(const SurrogateModel& model,
                                     const HiddenState& h_init,
                                     const Eigen::VectorXd& obs_init_raw,
                                     const std::vector<Eigen::VectorXd>& actions_raw);

// ---- training ----

struct SurrogateTrainConfig {
  SurrogateArch arch;
  int epochs = 30;
  int windows_per_epoch = 192;
  int batch = 8;
  int warmup = 16;
  int k_max = 10;
  int probe_windows = 32;  // fixed evaluation windows for the reported curve
  double lr = 1e-3;
  double grad_clip = 1.0;
  uint64_t seed = 1;
  bool verbose = false;
};

struct SurrogateTrainReport {
  std::vector<double> epoch_loss;        // fixed-probe loss, dropout off
  std::vector<double> epoch_train_loss;  // mean minibatch loss
  std::vector<int> epoch_k;              // free-run depth schedule
  std::vector<double> wall_time_s;
};

SurrogateModel train_surrogate(const Dataset& dataset,
                               const SurrogateTrainConfig& cfg,
                               SurrogateTrainReport* report = nullptr);

// ---- prediction diagnostics ----

struct WindowPrediction {
  double one_step_pos_err = 0.0;     // mm, after 1 free-run step
  double one_step_pos_change = 0.0;  // mm, ground-truth pose change over that step
  double mean_pos_err = 0.0;         // mm, over the horizon
  double final_pos_err = 0.0;        // mm, at the last step
};

// Warm-up over [start - n_init, start), then free-run `horizon` steps with the
// recorded actions, comparing predicted vs recorded poses.
WindowPrediction predict_window(const SurrogateModel& model, const Trajectory& traj,
                                int start, int n_init, int horizon);

// ---- checkpoint io ----

void save_surrogate(const SurrogateModel& model, const std::string& path);
SurrogateModel load_surrogate(const std::string& path);

}  // namespace tdcr
