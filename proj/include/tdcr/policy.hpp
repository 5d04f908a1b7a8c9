#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tdcr/autodiff.hpp"
#include "tdcr/backend.hpp"
#include "tdcr/core_math.hpp"
#include "tdcr/surrogate.hpp"

namespace tdcr {

struct PolicyArch {
  int layers = 2;
  int width = 64;
  int n_reference = 50;  // look-ahead poses concatenated into the input
  double dropout = 0.0;  // optional, off by default for BPTT training
};

struct PolicyParams {
  PolicyArch arch;
  std::vector<RnnLayerParams> cells;
  Eigen::MatrixXd head_w;  // 9 x width
  Eigen::MatrixXd head_b;  // 9 x 1

  void visit(const std::function<void(const std::string&, Eigen::MatrixXd&)>& fn);
  void visit(const std::function<void(const std::string&, const Eigen::MatrixXd&)>& fn) const;
  int input_dim(const SurrogateArch& surrogate_arch) const;
};

// The tracking policy with everything needed to run it: the standardizers it
// was trained with, the pose scale used for reference deltas, and the action
// increment bound.
struct PolicyModel {
  PolicyParams params;
  SurrogateArch surrogate_arch;  // hidden-state layout the policy expects
  Standardizer obs_std;
  Standardizer act_std;
  double delta_a_max = 2.0;  // mm per step, tanh output scale
  double l_min = -12.0;
  double l_max = 12.0;
};

PolicyParams init_policy_params(const PolicyArch& arch,
                                const SurrogateArch& surrogate_arch, uint64_t seed);

// ---- tape-side forward graph ----

struct TapePolicy {
  std::vector<TapeRnnLayer> cells;
  ad::Value head_w, head_b;
  PolicyArch arch;
};

TapePolicy lift_policy(ad::Tape& tape, const PolicyParams& params, bool requires_grad);

// Reference window as standardized deltas: (T*_{t+i} - T_t) with wrapped
// orientation components, divided by the pose channel scale. `pose_raw` is
// the current pose on the tape (6x1, raw units).
ad::Value reference_features(ad::Tape& tape, const std::vector<Pose6>& window,
                             ad::Value pose_raw, const Eigen::Matrix<double, 6, 1>& pose_sigma);

// Extracts the raw-unit pose from a standardized observation on the tape.
ad::Value pose_from_obs(ad::Tape& tape, ad::Value obs_std, const Standardizer& std);

struct PolicyStep {
  ad::Value delta_a;                   // 9x1, raw mm, bounded by delta_a_max
  std::vector<ad::Value> hidden_next;  // policy recurrent state
};

// delta_a = delta_a_max * tanh(head(stack(o, h, a_prev, r))).
PolicyStep policy_act(ad::Tape& tape, const TapePolicy& net, double delta_a_max,
                      ad::Value obs_std, const std::vector<ad::Value>& surrogate_hidden,
                      ad::Value action_prev_std, ad::Value ref_features,
                      const std::vector<ad::Value>& policy_hidden,
                      DropoutPlan* dropout = nullptr);

// ---- plain inference ----

struct ActionState {
  Eigen::VectorXd a_prev;      // raw commanded lengths
  HiddenState policy_hidden;   // policy recurrent state
};

ActionState initial_action_state(const PolicyModel& model, const Eigen::VectorXd& a0);

// One control step outside training; returns the bounded increment.
Eigen::VectorXd act(const PolicyModel& model, const Observation& obs,
                    const HiddenState& surrogate_hidden, ActionState& action_state,
                    const std::vector<Pose6>& reference_window);

// Runs the policy against a backend for `steps` control periods. The
// surrogate model is used as the hidden-state observer on both backends. The
// reference is padded by holding its final pose once exhausted.
ClosedLoopResult run_closed_loop(const PolicyModel& model, const SurrogateModel& surrogate,
                                 Backend& backend, const std::vector<Pose6>& reference,
                                 int steps);

// ---- checkpoint io ----

void save_policy(const PolicyModel& model, const std::string& path,
                 const nlohmann::json& extra_meta = {});
PolicyModel load_policy(const std::string& path);

}  // namespace tdcr
