#include "tdcr/surrogate.hpp"

#include <chrono>
#include <cmath>
#include <iostream>

#include "tdcr/checkpoint.hpp"
#include "tdcr/errors.hpp"
#include "tdcr/optim.hpp"

namespace tdcr {

namespace {

Eigen::MatrixXd uniform_init(int rows, int cols, double limit, RandomStream& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(-limit, limit);
  return m;
}

}  // namespace

void SurrogateParams::visit(
    const std::function<void(const std::string&, Eigen::MatrixXd&)>& fn) {
  for (size_t i = 0; i < cells.size(); ++i) {
    const std::string p = "cell" + std::to_string(i) + ".";
    fn(p + "w_in", cells[i].w_in);
    fn(p + "w_rec", cells[i].w_rec);
    fn(p + "b", cells[i].b);
    fn(p + "ln_gain", cells[i].ln_gain);
    fn(p + "ln_bias", cells[i].ln_bias);
  }
  for (size_t i = 0; i < head_w.size(); ++i) {
    fn("head" + std::to_string(i) + ".w", head_w[i]);
    fn("head" + std::to_string(i) + ".b", head_b[i]);
  }
}

void SurrogateParams::visit(
    const std::function<void(const std::string&, const Eigen::MatrixXd&)>& fn) const {
  const_cast<SurrogateParams*>(this)->visit(
      [&fn](const std::string& n, Eigen::MatrixXd& m) { fn(n, m); });
}

HiddenState zero_hidden(const SurrogateArch& arch) {
  return HiddenState(arch.layers, Eigen::VectorXd::Zero(arch.width));
}

SurrogateParams init_surrogate_params(const SurrogateArch& arch, uint64_t seed) {
  if (arch.layers < 1 || arch.width < 1)
    fail(ErrorKind::invalid_argument, "surrogate arch: layers and width must be >= 1");
  RandomStream rng(derive_seed(seed, "surrogate-init"));
  SurrogateParams p;
  p.arch = arch;
  const int in_dim = kObsDim + kNumMotors;
  for (int i = 0; i < arch.layers; ++i) {
    RnnLayerParams cell;
    const int fan_in = (i == 0 ? in_dim : arch.width) + arch.width;
    const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
    cell.w_in = uniform_init(arch.width, i == 0 ? in_dim : arch.width, limit, rng);
    cell.w_rec = uniform_init(arch.width, arch.width, limit, rng);
    cell.b = Eigen::MatrixXd::Zero(arch.width, 1);
    cell.ln_gain = Eigen::MatrixXd::Ones(arch.width, 1);
    cell.ln_bias = Eigen::MatrixXd::Zero(arch.width, 1);
    p.cells.push_back(std::move(cell));
  }
  if (arch.head_hidden > 0) {
    const double l0 = 1.0 / std::sqrt(static_cast<double>(arch.width));
    p.head_w.push_back(uniform_init(arch.head_hidden, arch.width, l0, rng));
    p.head_b.push_back(Eigen::MatrixXd::Zero(arch.head_hidden, 1));
    // zero-initialized output layer: the initial model is the identity map
    p.head_w.push_back(Eigen::MatrixXd::Zero(kObsDim, arch.head_hidden));
    p.head_b.push_back(Eigen::MatrixXd::Zero(kObsDim, 1));
  } else {
    p.head_w.push_back(Eigen::MatrixXd::Zero(kObsDim, arch.width));
    p.head_b.push_back(Eigen::MatrixXd::Zero(kObsDim, 1));
  }
  return p;
}

TapeSurrogate lift_surrogate(ad::Tape& tape, const SurrogateParams& params,
                             bool requires_grad) {
  TapeSurrogate net;
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
  for (const auto& w : params.head_w) net.head_w.push_back(tape.input(w, requires_grad));
  for (const auto& b : params.head_b) net.head_b.push_back(tape.input(b, requires_grad));
  return net;
}

std::vector<ad::Value> surrogate_transition(ad::Tape& tape, const TapeSurrogate& net,
                                            const std::vector<ad::Value>& hidden,
                                            ad::Value obs_std, ad::Value act_std,
                                            DropoutPlan* dropout) {
  if (static_cast<int>(hidden.size()) != net.arch.layers)
    fail(ErrorKind::invalid_argument, "surrogate_transition: hidden layer count mismatch");
  std::vector<ad::Value> next;
  next.reserve(hidden.size());
  ad::Value x = tape.concat_rows({obs_std, act_std});
  for (int i = 0; i < net.arch.layers; ++i) {
    if (i > 0 && dropout && dropout->enabled)
      x = tape.dropout(x, dropout->rate, true, dropout->next());
    const TapeRnnLayer& cell = net.cells[i];
    ad::Value pre = tape.add(tape.add(tape.matmul(cell.w_in, x),
                                      tape.matmul(cell.w_rec, hidden[i])),
                             cell.b);
    ad::Value h = tape.tanh(tape.layer_norm(pre, cell.ln_gain, cell.ln_bias));
    next.push_back(h);
    x = h;
  }
  return next;
}

ad::Value surrogate_head(ad::Tape& tape, const TapeSurrogate& net,
                         ad::Value hidden_last) {
  ad::Value x = hidden_last;
  for (size_t i = 0; i < net.head_w.size(); ++i) {
    x = tape.add(tape.matmul(net.head_w[i], x), net.head_b[i]);
    if (i + 1 < net.head_w.size()) x = tape.tanh(x);
  }
  return x;
}

namespace {

std::vector<ad::Value> lift_hidden(ad::Tape& tape, const HiddenState& hidden) {
  std::vector<ad::Value> values;
  values.reserve(hidden.size());
  for (const auto& h : hidden) values.push_back(tape.input(h, false));
  return values;
}

HiddenState lower_hidden(const ad::Tape& tape, const std::vector<ad::Value>& hidden) {
  HiddenState out;
  out.reserve(hidden.size());
  for (ad::Value v : hidden) out.push_back(tape.value(v));
  return out;
}

}  // namespace

HiddenState transition(const SurrogateModel& model, const HiddenState& hidden,
                       const Eigen::VectorXd& obs_raw, const Eigen::VectorXd& act_raw) {
  ad::Tape tape;
  TapeSurrogate net = lift_surrogate(tape, model.params, false);
  auto h = surrogate_transition(tape, net,
                                lift_hidden(tape, hidden),
                                tape.input(model.obs_std.transform(obs_raw), false),
                                tape.input(model.act_std.transform(act_raw), false));
  return lower_hidden(tape, h);
}

Eigen::VectorXd predict_observation(const SurrogateModel& model,
                                    const Eigen::VectorXd& obs_raw,
                                    const HiddenState& hidden_next) {
  ad::Tape tape;
  TapeSurrogate net = lift_surrogate(tape, model.params, false);
  ad::Value delta = surrogate_head(tape, net, tape.input(hidden_next.back(), false));
  const Eigen::VectorXd next_std = model.obs_std.transform(obs_raw) + tape.value(delta);
  return model.obs_std.inverse(next_std);
}

std::vector<Eigen::VectorXd> rollout(const SurrogateModel& model,
                                     const HiddenState& h_init,
                                     const Eigen::VectorXd& obs_init_raw,
                                     const std::vector<Eigen::VectorXd>& actions_raw) {
  ad::Tape tape;
  TapeSurrogate net = lift_surrogate(tape, model.params, false);
  std::vector<ad::Value> h = lift_hidden(tape, h_init);
  ad::Value obs = tape.input(model.obs_std.transform(obs_init_raw), false);
  std::vector<Eigen::VectorXd> predictions;
  predictions.reserve(actions_raw.size());
  for (size_t t = 0; t < actions_raw.size(); ++t) {
    ad::Value act = tape.input(model.act_std.transform(actions_raw[t]), false);
    h = surrogate_transition(tape, net, h, obs, act);
    obs = tape.add(obs, surrogate_head(tape, net, h.back()));
    Eigen::VectorXd raw = model.obs_std.inverse(tape.value(obs));
    if (!raw.allFinite())
      fail(ErrorKind::numeric,
           "surrogate rollout produced a non-finite observation at step " +
               std::to_string(t));
    predictions.push_back(std::move(raw));
  }
  return predictions;
}

namespace {

struct WindowSpec {
  int trajectory = 0;
  int start = 0;  // first predicted index is start + 1
  int k = 1;      // free-run depth
};

// Builds the free-run prediction loss for one window on the tape.
ad::Value window_loss(ad::Tape& tape, const TapeSurrogate& net,
                      const Standardizer& obs_std, const Standardizer& act_std,
                      const Trajectory& traj, const WindowSpec& w, int warmup,
                      DropoutPlan* dropout) {
  std::vector<ad::Value> h;
  for (int i = 0; i < net.arch.layers; ++i)
    h.push_back(tape.input(Eigen::VectorXd::Zero(net.arch.width), false));
  for (int j = w.start - warmup; j < w.start; ++j) {
    ad::Value o = tape.input(obs_std.transform(traj.observations.row(j).transpose()), false);
    ad::Value u = tape.input(act_std.transform(traj.actions.row(j).transpose()), false);
    h = surrogate_transition(tape, net, h, o, u, dropout);
  }
  ad::Value obs = tape.input(obs_std.transform(traj.observations.row(w.start).transpose()), false);
  ad::Value acc;
  for (int i = 1; i <= w.k; ++i) {
    ad::Value u = tape.input(
        act_std.transform(traj.actions.row(w.start + i - 1).transpose()), false);
    h = surrogate_transition(tape, net, h, obs, u, dropout);
    obs = tape.add(obs, surrogate_head(tape, net, h.back()));
    ad::Value target = tape.input(
        obs_std.transform(traj.observations.row(w.start + i).transpose()), false);
    ad::Value err = tape.mean(tape.square(tape.sub(obs, target)));
    acc = (i == 1) ? err : tape.add(acc, err);
  }
  return tape.scalar_mul(1.0 / static_cast<double>(w.k), acc);
}

WindowSpec draw_window(const Dataset& ds, int warmup, int k, RandomStream& rng) {
  // Rejection-free: pick uniformly over valid (trajectory, start) pairs.
  std::vector<int64_t> counts(ds.trajectories.size());
  int64_t total = 0;
  for (size_t i = 0; i < ds.trajectories.size(); ++i) {
    const int64_t n = ds.trajectories[i].steps() - warmup - k;
    counts[i] = std::max<int64_t>(0, n);
    total += counts[i];
  }
  if (total == 0)
    fail(ErrorKind::invalid_argument, "dataset trajectories too short for training windows");
  int64_t draw = static_cast<int64_t>(rng.index(static_cast<uint64_t>(total)));
  WindowSpec w;
  for (size_t i = 0; i < counts.size(); ++i) {
    if (draw < counts[i]) {
      w.trajectory = static_cast<int>(i);
      w.start = warmup + static_cast<int>(draw);
      w.k = k;
      return w;
    }
    draw -= counts[i];
  }
  fail(ErrorKind::invalid_argument, "window draw out of range");
}

int k_schedule(int epoch, int k_max) {
  if (epoch <= 5) return 1;
  return std::min(k_max, 1 + (epoch - 4) / 2);
}

}  // namespace

SurrogateModel train_surrogate(const Dataset& dataset,
                               const SurrogateTrainConfig& cfg,
                               SurrogateTrainReport* report) {
  if (dataset.trajectories.empty())
    fail(ErrorKind::invalid_argument, "train_surrogate: empty dataset");
  if (cfg.epochs < 1 || cfg.batch < 1 || cfg.windows_per_epoch < cfg.batch)
    fail(ErrorKind::invalid_argument, "train_surrogate: bad schedule");

  // Standardizers over the full dataset.
  const int64_t total = dataset.total_steps();
  Eigen::MatrixXd obs_all(total, kObsDim);
  Eigen::MatrixXd act_all(total, kNumMotors);
  int64_t row = 0;
  for (const auto& traj : dataset.trajectories) {
    obs_all.middleRows(row, traj.steps()) = traj.observations;
    act_all.middleRows(row, traj.steps()) = traj.actions;
    row += traj.steps();
  }

  SurrogateModel model;
  model.obs_std = Standardizer::fit(obs_all);
  model.act_std = Standardizer::fit(act_all);
  model.params = init_surrogate_params(cfg.arch, cfg.seed);

  std::vector<Eigen::MatrixXd*> slots;
  model.params.visit([&](const std::string&, Eigen::MatrixXd& m) { slots.push_back(&m); });
  AdamOptimizer opt(cfg.lr);

  // Fixed probe windows give a comparable loss across epochs.
  RandomStream probe_rng(derive_seed(cfg.seed, "surrogate-probe"));
  std::vector<WindowSpec> probes;
  for (int i = 0; i < cfg.probe_windows; ++i)
    probes.push_back(draw_window(dataset, cfg.warmup, cfg.k_max, probe_rng));

  auto probe_loss = [&]() {
    double sum = 0.0;
    for (const auto& w : probes) {
      ad::Tape tape;
      TapeSurrogate net = lift_surrogate(tape, model.params, false);
      ad::Value loss = window_loss(tape, net, model.obs_std, model.act_std,
                                   dataset.trajectories[w.trajectory], w,
                                   cfg.warmup, nullptr);
      sum += tape.value(loss)(0, 0);
    }
    return sum / static_cast<double>(probes.size());
  };

  RandomStream sample_rng(derive_seed(cfg.seed, "surrogate-sample"));
  uint64_t dropout_site = 0;
  const int iters = cfg.windows_per_epoch / cfg.batch;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const int k = k_schedule(epoch, cfg.k_max);
    double epoch_train = 0.0;
    for (int it = 0; it < iters; ++it) {
      std::vector<Eigen::MatrixXd> grads;
      for (auto* s : slots) grads.push_back(Eigen::MatrixXd::Zero(s->rows(), s->cols()));
      double batch_loss = 0.0;
      for (int b = 0; b < cfg.batch; ++b) {
        WindowSpec w = draw_window(dataset, cfg.warmup, k, sample_rng);
        ad::Tape tape;
        TapeSurrogate net = lift_surrogate(tape, model.params, true);
        DropoutPlan plan{cfg.arch.dropout > 0.0, cfg.arch.dropout,
                         derive_seed(cfg.seed, "dropout", dropout_site++), 0};
        ad::Value loss = window_loss(tape, net, model.obs_std, model.act_std,
                                     dataset.trajectories[w.trajectory], w,
                                     cfg.warmup, &plan);
        const double l = tape.value(loss)(0, 0);
        if (!std::isfinite(l))
          fail(ErrorKind::divergence,
               "surrogate training diverged at epoch " + std::to_string(epoch));
        batch_loss += l;
        tape.backward(loss);
        int slot = 0;
        auto grab = [&](ad::Value v) { grads[slot++] += tape.adjoint(v); };
        for (auto& cell : net.cells) {
          grab(cell.w_in); grab(cell.w_rec); grab(cell.b);
          grab(cell.ln_gain); grab(cell.ln_bias);
        }
        for (size_t i = 0; i < net.head_w.size(); ++i) { grab(net.head_w[i]); grab(net.head_b[i]); }
      }
      for (auto& g : grads) g /= static_cast<double>(cfg.batch);
      epoch_train += batch_loss / static_cast<double>(cfg.batch);
      opt.step(slots, grads, cfg.grad_clip);
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (report) {
      report->epoch_loss.push_back(probe_loss());
      report->epoch_train_loss.push_back(epoch_train / iters);
      report->epoch_k.push_back(k);
      report->wall_time_s.push_back(wall);
      if (cfg.verbose)
        std::cout << "surrogate epoch " << epoch << " k=" << k
                  << " probe_loss=" << report->epoch_loss.back() << "\n";
    } else if (cfg.verbose) {
      std::cout << "surrogate epoch " << epoch << " k=" << k
                << " train_loss=" << epoch_train / iters << "\n";
    }
  }
  return model;
}

WindowPrediction predict_window(const SurrogateModel& model, const Trajectory& traj,
                                int start, int n_init, int horizon) {
  if (start - n_init < 0 || start + horizon > traj.steps() - 1)
    fail(ErrorKind::invalid_argument, "predict_window: window out of range");
  HiddenState h = zero_hidden(model.params.arch);
  for (int j = start - n_init; j < start; ++j)
    h = transition(model, h, traj.observations.row(j).transpose(),
                   traj.actions.row(j).transpose());

  std::vector<Eigen::VectorXd> actions;
  actions.reserve(horizon);
  for (int i = 0; i < horizon; ++i)
    actions.push_back(traj.actions.row(start + i).transpose());

  ad::Tape tape;
  TapeSurrogate net = lift_surrogate(tape, model.params, false);
  std::vector<ad::Value> hv = lift_hidden(tape, h);
  ad::Value obs = tape.input(
      model.obs_std.transform(traj.observations.row(start).transpose()), false);

  WindowPrediction out;
  double sum_err = 0.0;
  for (int i = 1; i <= horizon; ++i) {
    ad::Value u = tape.input(model.act_std.transform(actions[i - 1]), false);
    hv = surrogate_transition(tape, net, hv, obs, u);
    obs = tape.add(obs, surrogate_head(tape, net, hv.back()));
    const Eigen::VectorXd raw = model.obs_std.inverse(tape.value(obs));
    const Eigen::Vector3d p_pred = raw.segment<3>(kPoseOffset);
    const Eigen::Vector3d p_true =
        traj.observations.row(start + i).segment<3>(kPoseOffset).transpose();
    const double err = (p_pred - p_true).norm();
    sum_err += err;
    if (i == 1) {
      out.one_step_pos_err = err;
      const Eigen::Vector3d p_prev =
          traj.observations.row(start).segment<3>(kPoseOffset).transpose();
      out.one_step_pos_change = (p_true - p_prev).norm();
    }
    if (i == horizon) out.final_pos_err = err;
  }
  out.mean_pos_err = sum_err / horizon;
  return out;
}

void save_surrogate(const SurrogateModel& model, const std::string& path) {
  Checkpoint ckpt;
  ckpt.role = "dynamics";
  ckpt.meta = {{"layers", model.params.arch.layers},
               {"width", model.params.arch.width},
               {"head_hidden", model.params.arch.head_hidden},
               {"dropout", model.params.arch.dropout}};
  ckpt.obs_std = model.obs_std;
  ckpt.act_std = model.act_std;
  model.params.visit([&](const std::string& name, const Eigen::MatrixXd& m) {
    ckpt.tensors.emplace_back(name, m);
  });
  save_checkpoint(ckpt, path);
}

SurrogateModel load_surrogate(const std::string& path) {
  Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.role != "dynamics")
    fail(ErrorKind::invalid_argument,
         "checkpoint at " + path + " has role '" + ckpt.role + "', expected 'dynamics'");
  SurrogateModel model;
  model.obs_std = ckpt.obs_std;
  model.act_std = ckpt.act_std;
  SurrogateArch arch;
  arch.layers = ckpt.meta.at("layers").get<int>();
  arch.width = ckpt.meta.at("width").get<int>();
  arch.head_hidden = ckpt.meta.at("head_hidden").get<int>();
  arch.dropout = ckpt.meta.at("dropout").get<double>();
  model.params = init_surrogate_params(arch, 0);
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
