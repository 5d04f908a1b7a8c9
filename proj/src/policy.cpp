#include "tdcr/policy.hpp"

#include <cmath>

#include "tdcr/checkpoint.hpp"
#include "tdcr/errors.hpp"

namespace tdcr {

namespace {

Eigen::MatrixXd uniform_init(int rows, int cols, double limit, RandomStream& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(-limit, limit);
  return m;
}

const std::vector<bool>& pose_wrap_mask(int n_poses) {
  static thread_local std::vector<bool> mask;
  mask.assign(static_cast<size_t>(6 * n_poses), false);
  for (int i = 0; i < n_poses; ++i)
    for (int d = 3; d < 6; ++d) mask[6 * i + d] = true;
  return mask;
}

}  // namespace

int PolicyParams::input_dim(const SurrogateArch& surrogate_arch) const {
  return kObsDim + surrogate_arch.layers * surrogate_arch.width + kNumMotors +
         kPoseDim * arch.n_reference;
}

void PolicyParams::visit(
    const std::function<void(const std::string&, Eigen::MatrixXd&)>& fn) {
  for (size_t i = 0; i < cells.size(); ++i) {
    const std::string p = "cell" + std::to_string(i) + ".";
    fn(p + "w_in", cells[i].w_in);
    fn(p + "w_rec", cells[i].w_rec);
    fn(p + "b", cells[i].b);
    fn(p + "ln_gain", cells[i].ln_gain);
    fn(p + "ln_bias", cells[i].ln_bias);
  }
  fn("head.w", head_w);
  fn("head.b", head_b);
}

void PolicyParams::visit(
    const std::function<void(const std::string&, const Eigen::MatrixXd&)>& fn) const {
  const_cast<PolicyParams*>(this)->visit(
      [&fn](const std::string& n, Eigen::MatrixXd& m) { fn(n, m); });
}

PolicyParams init_policy_params(const PolicyArch& arch,
                                const SurrogateArch& surrogate_arch, uint64_t seed) {
  if (arch.layers < 1 || arch.width < 1 || arch.n_reference < 1)
    fail(ErrorKind::invalid_argument, "policy arch: layers, width, N_r must be >= 1");
  RandomStream rng(derive_seed(seed, "policy-init"));
  PolicyParams p;
  p.arch = arch;
  const int in_dim = p.input_dim(surrogate_arch);
  for (int i = 0; i < arch.layers; ++i) {
    RnnLayerParams cell;
    const int cell_in = i == 0 ? in_dim : arch.width;
    const double limit = 1.0 / std::sqrt(static_cast<double>(cell_in + arch.width));
    cell.w_in = uniform_init(arch.width, cell_in, limit, rng);
    cell.w_rec = uniform_init(arch.width, arch.width, limit, rng);
    cell.b = Eigen::MatrixXd::Zero(arch.width, 1);
    cell.ln_gain = Eigen::MatrixXd::Ones(arch.width, 1);
    cell.ln_bias = Eigen::MatrixXd::Zero(arch.width, 1);
    p.cells.push_back(std::move(cell));
  }
  // zero head: the fresh policy holds the previous command
  p.head_w = Eigen::MatrixXd::Zero(kNumMotors, arch.width);
  p.head_b = Eigen::MatrixXd::Zero(kNumMotors, 1);
  return p;
}

TapePolicy lift_policy(ad::Tape& tape, const PolicyParams& params, bool requires_grad) {
  TapePolicy net;
  net.arch = params.arch;
  for (const auto& cell : params.cells) {
    TapeRnnLayer lifted;
    lifted.w_in = tape.input(cell.w_in, requires_grad);
    lifted.w_rec = tape.input(cell.w_rec, requires_grad);
    lifted.b = tape.input(cell.b, requires_grad);
    lifted.ln_gain = tape.input(cell.ln_gain, requires_grad);
    lifted.ln_bias = tape.input(cell.ln_bias, requires_grad);
    net.cells.push_back(lifted);
  }
  net.head_w = tape.input(params.head_w, requires_grad);
  net.head_b = tape.input(params.head_b, requires_grad);
  return net;
}

ad::Value pose_from_obs(ad::Tape& tape, ad::Value obs_std, const Standardizer& std) {
  ad::Value pose_std = tape.slice_rows(obs_std, kPoseOffset, kPoseDim);
  const Eigen::VectorXd sigma = std.std().segment(kPoseOffset, kPoseDim);
  const Eigen::VectorXd mu = std.mean().segment(kPoseOffset, kPoseDim);
  return ad::cadd(ad::cmul(pose_std, sigma), mu);
}

ad::Value reference_features(ad::Tape& tape, const std::vector<Pose6>& window,
                             ad::Value pose_raw,
                             const Eigen::Matrix<double, 6, 1>& pose_sigma) {
  if (window.empty())
    fail(ErrorKind::invalid_argument, "reference_features: empty window");
  const int n = static_cast<int>(window.size());
  Eigen::MatrixXd refs(6 * n, 1);
  for (int i = 0; i < n; ++i) refs.block<6, 1>(6 * i, 0) = window[i].flat();
  std::vector<ad::Value> tiles(n, pose_raw);
  ad::Value tiled = tape.concat_rows(tiles);
  ad::Value diff = tape.sub(tape.input(refs, false), tiled);
  ad::Value wrapped = tape.wrap_angle(diff, pose_wrap_mask(n));
  Eigen::MatrixXd inv_sigma(6 * n, 1);
  for (int i = 0; i < n; ++i)
    inv_sigma.block<6, 1>(6 * i, 0) = pose_sigma.cwiseInverse();
  return tape.mul(wrapped, tape.input(inv_sigma, false));
}

PolicyStep policy_act(ad::Tape& tape, const TapePolicy& net, double delta_a_max,
                      ad::Value obs_std, const std::vector<ad::Value>& surrogate_hidden,
                      ad::Value action_prev_std, ad::Value ref_features,
                      const std::vector<ad::Value>& policy_hidden,
                      DropoutPlan* dropout) {
  if (static_cast<int>(policy_hidden.size()) != net.arch.layers)
    fail(ErrorKind::invalid_argument, "policy_act: hidden layer count mismatch");
  std::vector<ad::Value> stack;
  stack.push_back(obs_std);
  for (ad::Value h : surrogate_hidden) stack.push_back(h);
  stack.push_back(action_prev_std);
  stack.push_back(ref_features);
  ad::Value x = tape.concat_rows(stack);

  PolicyStep out;
  for (int i = 0; i < net.arch.layers; ++i) {
    if (i > 0 && dropout && dropout->enabled)
      x = tape.dropout(x, dropout->rate, true, dropout->next());
    const TapeRnnLayer& cell = net.cells[i];
    ad::Value pre = tape.add(tape.add(tape.matmul(cell.w_in, x),
                                      tape.matmul(cell.w_rec, policy_hidden[i])),
                             cell.b);
    ad::Value h = tape.tanh(tape.layer_norm(pre, cell.ln_gain, cell.ln_bias));
    out.hidden_next.push_back(h);
    x = h;
  }
  ad::Value head = tape.add(tape.matmul(net.head_w, x), net.head_b);
  out.delta_a = tape.scalar_mul(delta_a_max, tape.tanh(head));
  return out;
}

ActionState initial_action_state(const PolicyModel& model, const Eigen::VectorXd& a0) {
  ActionState s;
  s.a_prev = a0;
  s.policy_hidden.assign(model.params.arch.layers,
                         Eigen::VectorXd::Zero(model.params.arch.width));
  return s;
}

Eigen::VectorXd act(const PolicyModel& model, const Observation& obs,
                    const HiddenState& surrogate_hidden, ActionState& action_state,
                    const std::vector<Pose6>& reference_window) {
  if (static_cast<int>(reference_window.size()) != model.params.arch.n_reference)
    fail(ErrorKind::invalid_argument,
         "act: reference window must have exactly N_r = " +
             std::to_string(model.params.arch.n_reference) + " poses, got " +
             std::to_string(reference_window.size()));
  ad::Tape tape;
  TapePolicy net = lift_policy(tape, model.params, false);
  ad::Value obs_v = tape.input(model.obs_std.transform(obs.flat()), false);
  std::vector<ad::Value> sh;
  for (const auto& h : surrogate_hidden) sh.push_back(tape.input(h, false));
  ad::Value a_prev = tape.input(model.act_std.transform(action_state.a_prev), false);
  ad::Value pose_raw = pose_from_obs(tape, obs_v, model.obs_std);
  const Eigen::Matrix<double, 6, 1> sigma =
      model.obs_std.std().segment<6>(kPoseOffset);
  ad::Value refs = reference_features(tape, reference_window, pose_raw, sigma);
  std::vector<ad::Value> ph;
  for (const auto& h : action_state.policy_hidden) ph.push_back(tape.input(h, false));
  PolicyStep step = policy_act(tape, net, model.delta_a_max, obs_v, sh, a_prev, refs, ph);
  for (size_t i = 0; i < step.hidden_next.size(); ++i)
    action_state.policy_hidden[i] = tape.value(step.hidden_next[i]);
  return tape.value(step.delta_a);
}

ClosedLoopResult run_closed_loop(const PolicyModel& model, const SurrogateModel& surrogate,
                                 Backend& backend, const std::vector<Pose6>& reference,
                                 int steps) {
  if (reference.empty())
    fail(ErrorKind::invalid_argument, "run_closed_loop: empty reference");
  if (steps < 0) steps = static_cast<int>(reference.size()) - 1;

  const int n_r = model.params.arch.n_reference;
  auto ref_at = [&](int i) {
    return reference[std::min<size_t>(i, reference.size() - 1)];
  };

  ClosedLoopResult result;
  Observation obs = backend.current();
  HiddenState h = zero_hidden(surrogate.params.arch);
  ActionState action_state = initial_action_state(model, backend.current_command());

  for (int t = 0; t < steps; ++t) {
    std::vector<Pose6> window(n_r);
    for (int k = 0; k < n_r; ++k) window[k] = ref_at(t + 1 + k);
    const Eigen::VectorXd delta = act(model, obs, h, action_state, window);
    Eigen::VectorXd a = (action_state.a_prev + delta)
                            .cwiseMax(model.l_min)
                            .cwiseMin(model.l_max);
    const Observation prev_obs = obs;
    obs = backend.apply(a);
    h = transition(surrogate, h, prev_obs.flat(), a);
    action_state.a_prev = a;

    const Pose6 achieved = backend.metric_pose();
    if (!achieved.finite()) {
      result.aborted = true;
      result.abort_step = t;
      break;
    }
    const Pose6 target = ref_at(t + 1);
    auto [pe, oe] = pose_error(achieved, target);
    result.pos_err.push_back(pe);
    result.ori_err.push_back(oe);
    result.executed.push_back(achieved);
    result.reference.push_back(target);
    result.commands.push_back(a);
  }
  return result;
}

void save_policy(const PolicyModel& model, const std::string& path,
                 const nlohmann::json& extra_meta) {
  Checkpoint ckpt;
  ckpt.role = "policy";
  ckpt.meta = {{"layers", model.params.arch.layers},
               {"width", model.params.arch.width},
               {"n_reference", model.params.arch.n_reference},
               {"dropout", model.params.arch.dropout},
               {"surrogate_layers", model.surrogate_arch.layers},
               {"surrogate_width", model.surrogate_arch.width},
               {"surrogate_head_hidden", model.surrogate_arch.head_hidden},
               {"surrogate_dropout", model.surrogate_arch.dropout},
               {"delta_a_max", model.delta_a_max},
               {"l_min", model.l_min},
               {"l_max", model.l_max}};
  if (!extra_meta.is_null() && !extra_meta.empty())
    ckpt.meta["extra"] = extra_meta;
  ckpt.obs_std = model.obs_std;
  ckpt.act_std = model.act_std;
  model.params.visit([&](const std::string& name, const Eigen::MatrixXd& m) {
    ckpt.tensors.emplace_back(name, m);
  });
  save_checkpoint(ckpt, path);
}

PolicyModel load_policy(const std::string& path) {
  Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.role != "policy")
    fail(ErrorKind::invalid_argument,
         "checkpoint at " + path + " has role '" + ckpt.role + "', expected 'policy'");
  PolicyModel model;
  model.obs_std = ckpt.obs_std;
  model.act_std = ckpt.act_std;
  PolicyArch arch;
  arch.layers = ckpt.meta.at("layers").get<int>();
  arch.width = ckpt.meta.at("width").get<int>();
  arch.n_reference = ckpt.meta.at("n_reference").get<int>();
  arch.dropout = ckpt.meta.at("dropout").get<double>();
  model.surrogate_arch.layers = ckpt.meta.at("surrogate_layers").get<int>();
  model.surrogate_arch.width = ckpt.meta.at("surrogate_width").get<int>();
  model.surrogate_arch.head_hidden = ckpt.meta.at("surrogate_head_hidden").get<int>();
  model.surrogate_arch.dropout = ckpt.meta.at("surrogate_dropout").get<double>();
  model.delta_a_max = ckpt.meta.at("delta_a_max").get<double>();
  model.l_min = ckpt.meta.at("l_min").get<double>();
  model.l_max = ckpt.meta.at("l_max").get<double>();
  model.params = init_policy_params(arch, model.surrogate_arch, 0);
  size_t idx = 0;
  model.params.visit([&](const std::string& name, Eigen::MatrixXd& m) {
    if (idx >= ckpt.tensors.size() || ckpt.tensors[idx].first != name)
      fail(ErrorKind::corrupt_header, "checkpoint tensor order mismatch at " + name);
    if (ckpt.tensors[idx].second.rows() != m.rows() ||
        ckpt.tensors[idx].second.cols() != m.cols())
      fail(ErrorKind::corrupt_header, "checkpoint tensor shape mismatch at " + name);
    m = ckpt.tensors[idx].second;
    ++idx;
  });
  return model;
}

}  // namespace tdcr
