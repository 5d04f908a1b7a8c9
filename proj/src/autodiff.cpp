#include "tdcr/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "tdcr/errors.hpp"
#include "tdcr/rng.hpp"

namespace tdcr::ad {

namespace {

std::string shape_str(const Eigen::MatrixXd& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

[[noreturn]] void shape_fail(const char* op, const Eigen::MatrixXd& a,
                             const Eigen::MatrixXd& b) {
  fail(ErrorKind::invalid_argument, std::string(op) + ": shape mismatch " +
                                        shape_str(a) + " vs " + shape_str(b));
}

void require_vector(const char* op, const Eigen::MatrixXd& v) {
  if (v.cols() != 1)
    fail(ErrorKind::invalid_argument,
         std::string(op) + ": expected a column vector, got " + shape_str(v));
}

}  // namespace

Value Tape::push(Eigen::MatrixXd value, bool requires_grad, Backprop backprop) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) node.backprop = std::move(backprop);
  nodes_.push_back(std::move(node));
  return Value{this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::check_owned(Value v, const char* op) const {
  if (v.tape != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
    fail(ErrorKind::invalid_argument,
         std::string(op) + ": value does not belong to this tape");
}

Eigen::MatrixXd& Tape::acc(int id) {
  Node& n = nodes_[id];
  if (n.adjoint.size() == 0)
    n.adjoint = Eigen::MatrixXd::Zero(n.value.rows(), n.value.cols());
  return n.adjoint;
}

Value Tape::input(Eigen::MatrixXd v, bool requires_grad) {
  return push(std::move(v), requires_grad, {});
}

Value Tape::scalar(double s) {
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = s;
  return input(std::move(m), false);
}

const Eigen::MatrixXd& Tape::value(Value v) const {
  check_owned(v, "value");
  return nodes_[v.id].value;
}

Eigen::MatrixXd Tape::adjoint(Value v) const {
  check_owned(v, "adjoint");
  const Node& n = nodes_[v.id];
  if (n.adjoint.size() == 0)
    return Eigen::MatrixXd::Zero(n.value.rows(), n.value.cols());
  return n.adjoint;
}

void Tape::reset() { nodes_.clear(); }

Value Tape::matmul(Value a, Value b) {
  check_owned(a, "matmul");
  check_owned(b, "matmul");
  const Eigen::MatrixXd& va = val(a.id);
  const Eigen::MatrixXd& vb = val(b.id);
  if (va.cols() != vb.rows()) shape_fail("matmul", va, vb);
  const bool rg = needs_grad(a) || needs_grad(b);
  const int ia = a.id, ib = b.id;
  return push(va * vb, rg, [ia, ib](Tape& t, int out) {
    const Eigen::MatrixXd& g = t.adj(out);
    if (t.nodes_[ia].requires_grad) t.acc(ia).noalias() += g * t.val(ib).transpose();
    if (t.nodes_[ib].requires_grad) t.acc(ib).noalias() += t.val(ia).transpose() * g;
  });
}

Value Tape::add(Value a, Value b) {
  check_owned(a, "add");
  check_owned(b, "add");
  const Eigen::MatrixXd& va = val(a.id);
  const Eigen::MatrixXd& vb = val(b.id);
  if (va.rows() != vb.rows() || va.cols() != vb.cols()) shape_fail("add", va, vb);
  const bool rg = needs_grad(a) || needs_grad(b);
  const int ia = a.id, ib = b.id;
  return push(va + vb, rg, [ia, ib](Tape& t, int out) {
    const Eigen::MatrixXd& g = t.adj(out);
    if (t.nodes_[ia].requires_grad) t.acc(ia) += g;
    if (t.nodes_[ib].requires_grad) t.acc(ib) += g;
  });
}

Value Tape::sub(Value a, Value b) {
  check_owned(a, "sub");
  check_owned(b, "sub");
  const Eigen::MatrixXd& va = val(a.id);
  const Eigen::MatrixXd& vb = val(b.id);
  if (va.rows() != vb.rows() || va.cols() != vb.cols()) shape_fail("sub", va, vb);
  const bool rg = needs_grad(a) || needs_grad(b);
  const int ia = a.id, ib = b.id;
  return push(va - vb, rg, [ia, ib](Tape& t, int out) {
    const Eigen::MatrixXd& g = t.adj(out);
    if (t.nodes_[ia].requires_grad) t.acc(ia) += g;
    if (t.nodes_[ib].requires_grad) t.acc(ib) -= g;
  });
}

Value Tape::scalar_mul(double s, Value a) {
  check_owned(a, "scalar_mul");
  const int ia = a.id;
  return push(s * val(ia), needs_grad(a), [ia, s](Tape& t, int out) {
    if (t.nodes_[ia].requires_grad) t.acc(ia) += s * t.adj(out);
  });
}

Value Tape::mul(Value a, Value b) {
  check_owned(a, "mul");
  check_owned(b, "mul");
  const Eigen::MatrixXd& va = val(a.id);
  const Eigen::MatrixXd& vb = val(b.id);
  if (va.rows() != vb.rows() || va.cols() != vb.cols()) shape_fail("mul", va, vb);
  const bool rg = needs_grad(a) || needs_grad(b);
  const int ia = a.id, ib = b.id;
  return push(va.cwiseProduct(vb), rg, [ia, ib](Tape& t, int out) {
    const Eigen::MatrixXd& g = t.adj(out);
    if (t.nodes_[ia].requires_grad)
      t.acc(ia) += g.cwiseProduct(t.val(ib));
    if (t.nodes_[ib].requires_grad)
      t.acc(ib) += g.cwiseProduct(t.val(ia));
  });
}

Value Tape::concat_rows(const std::vector<Value>& parts) {
  if (parts.empty())
    fail(ErrorKind::invalid_argument, "concat_rows: no inputs");
  int total = 0;
  bool rg = false;
  const Eigen::Index cols = val(parts[0].id).cols();
  for (Value p : parts) {
    check_owned(p, "concat_rows");
    if (val(p.id).cols() != cols) shape_fail("concat_rows", val(parts[0].id), val(p.id));
    total += static_cast<int>(val(p.id).rows());
    rg = rg || needs_grad(p);
  }
  Eigen::MatrixXd out(total, cols);
  std::vector<int> ids(parts.size());
  int offset = 0;
  for (size_t i = 0; i < parts.size(); ++i) {
    ids[i] = parts[i].id;
    const Eigen::MatrixXd& v = val(parts[i].id);
    out.middleRows(offset, v.rows()) = v;
    offset += static_cast<int>(v.rows());
  }
  return push(std::move(out), rg, [ids](Tape& t, int o) {
    const Eigen::MatrixXd& g = t.adj(o);
    int off = 0;
    for (int id : ids) {
      const int r = static_cast<int>(t.val(id).rows());
      if (t.nodes_[id].requires_grad) t.acc(id) += g.middleRows(off, r);
      off += r;
    }
  });
}

Value Tape::slice_rows(Value a, int start, int count) {
  check_owned(a, "slice_rows");
  const Eigen::MatrixXd& va = val(a.id);
  if (start < 0 || count < 0 || start + count > va.rows())
    fail(ErrorKind::invalid_argument,
         "slice_rows: range [" + std::to_string(start) + ", " +
             std::to_string(start + count) + ") out of bounds for " +
             shape_str(va));
  const int ia = a.id;
  return push(va.middleRows(start, count), needs_grad(a),
              [ia, start, count](Tape& t, int out) {
                if (t.nodes_[ia].requires_grad)
                  t.acc(ia).middleRows(start, count) += t.adj(out);
              });
}

Value Tape::tanh(Value a) {
  check_owned(a, "tanh");
  const int ia = a.id;
  return push(val(ia).array().tanh().matrix(), needs_grad(a),
              [ia](Tape& t, int out) {
                if (!t.nodes_[ia].requires_grad) return;
                const Eigen::MatrixXd& y = t.val(out);
                t.acc(ia).array() +=
                    t.adj(out).array() * (1.0 - y.array().square());
              });
}

Value Tape::relu(Value a) {
  check_owned(a, "relu");
  const int ia = a.id;
  return push(val(ia).cwiseMax(0.0), needs_grad(a), [ia](Tape& t, int out) {
    if (!t.nodes_[ia].requires_grad) return;
    t.acc(ia).array() +=
        t.adj(out).array() * (t.val(ia).array() > 0.0).cast<double>();
  });
}

Value Tape::layer_norm(Value x, Value gain, Value bias, double eps) {
  check_owned(x, "layer_norm");
  check_owned(gain, "layer_norm");
  check_owned(bias, "layer_norm");
  const Eigen::MatrixXd& vx = val(x.id);
  require_vector("layer_norm", vx);
  if (val(gain.id).rows() != vx.rows() || val(bias.id).rows() != vx.rows())
    shape_fail("layer_norm", vx, val(gain.id));
  const double mu = vx.mean();
  const double var = (vx.array() - mu).square().mean();
  const double inv_std = 1.0 / std::sqrt(var + eps);
  Eigen::MatrixXd xhat = (vx.array() - mu).matrix() * inv_std;
  Eigen::MatrixXd out = val(gain.id).cwiseProduct(xhat) + val(bias.id);
  const bool rg = needs_grad(x) || needs_grad(gain) || needs_grad(bias);
  const int ix = x.id, ig = gain.id, ib = bias.id;
  return push(std::move(out), rg,
              [ix, ig, ib, inv_std, xhat](Tape& t, int out_id) {
                const Eigen::MatrixXd& g = t.adj(out_id);
                if (t.nodes_[ib].requires_grad) t.acc(ib) += g;
                if (t.nodes_[ig].requires_grad) t.acc(ig) += g.cwiseProduct(xhat);
                if (!t.nodes_[ix].requires_grad) return;
                const Eigen::MatrixXd dxhat = g.cwiseProduct(t.val(ig));
                const double m1 = dxhat.mean();
                const double m2 = dxhat.cwiseProduct(xhat).mean();
                t.acc(ix).array() +=
                    inv_std * (dxhat.array() - m1 - xhat.array() * m2);
              });
}

Value Tape::dropout(Value a, double rate, bool train, uint64_t seed) {
  check_owned(a, "dropout");
  if (rate < 0.0 || rate >= 1.0)
    fail(ErrorKind::invalid_argument,
         "dropout rate must be in [0, 1), got " + std::to_string(rate));
  if (!train || rate == 0.0) {
    const int ia = a.id;
    return push(val(ia), needs_grad(a), [ia](Tape& t, int out) {
      if (t.nodes_[ia].requires_grad) t.acc(ia) += t.adj(out);
    });
  }
  const Eigen::MatrixXd& va = val(a.id);
  const double keep = 1.0 - rate;
  Eigen::MatrixXd mask(va.rows(), va.cols());
  uint64_t counter = 0;
  for (Eigen::Index c = 0; c < va.cols(); ++c)
    for (Eigen::Index r = 0; r < va.rows(); ++r)
      mask(r, c) = counter_uniform01(seed, counter++) < keep ? 1.0 / keep : 0.0;
  const int ia = a.id;
  return push(va.cwiseProduct(mask), needs_grad(a),
              [ia, mask](Tape& t, int out) {
                if (t.nodes_[ia].requires_grad)
                  t.acc(ia) += t.adj(out).cwiseProduct(mask);
              });
}

Value Tape::clip(Value a, double lo, double hi) {
  check_owned(a, "clip");
  if (lo > hi)
    fail(ErrorKind::invalid_argument, "clip: lo > hi");
  const int ia = a.id;
  return push(val(ia).cwiseMax(lo).cwiseMin(hi), needs_grad(a),
              [ia, lo, hi](Tape& t, int out) {
                if (!t.nodes_[ia].requires_grad) return;
                const auto& x = t.val(ia).array();
                t.acc(ia).array() += t.adj(out).array() *
                                     ((x > lo) && (x < hi)).cast<double>();
              });
}

Value Tape::wrap_angle(Value a, const std::vector<bool>& component_mask) {
  check_owned(a, "wrap_angle");
  const Eigen::MatrixXd& va = val(a.id);
  require_vector("wrap_angle", va);
  if (!component_mask.empty() &&
      static_cast<int>(component_mask.size()) != va.rows())
    fail(ErrorKind::invalid_argument,
         "wrap_angle: mask size " + std::to_string(component_mask.size()) +
             " does not match vector of " + std::to_string(va.rows()));
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Eigen::MatrixXd shift = Eigen::MatrixXd::Zero(va.rows(), 1);
  for (Eigen::Index r = 0; r < va.rows(); ++r) {
    if (!component_mask.empty() && !component_mask[r]) continue;
    double w = std::remainder(va(r, 0), two_pi);
    if (w <= -std::numbers::pi) w += two_pi;
    shift(r, 0) = w - va(r, 0);
  }
  const int ia = a.id;
  return push(va + shift, needs_grad(a), [ia](Tape& t, int out) {
    if (t.nodes_[ia].requires_grad) t.acc(ia) += t.adj(out);
  });
}

Value Tape::square(Value a) {
  check_owned(a, "square");
  const int ia = a.id;
  return push(val(ia).array().square().matrix(), needs_grad(a),
              [ia](Tape& t, int out) {
                if (t.nodes_[ia].requires_grad)
                  t.acc(ia).array() += 2.0 * t.adj(out).array() * t.val(ia).array();
              });
}

Value Tape::sum(Value a) {
  check_owned(a, "sum");
  const int ia = a.id;
  Eigen::MatrixXd out(1, 1);
  out(0, 0) = val(ia).sum();
  return push(std::move(out), needs_grad(a), [ia](Tape& t, int o) {
    if (t.nodes_[ia].requires_grad)
      t.acc(ia).array() += t.adj(o)(0, 0);
  });
}

Value Tape::mean(Value a) {
  check_owned(a, "mean");
  const int ia = a.id;
  const double inv_n = 1.0 / static_cast<double>(val(ia).size());
  Eigen::MatrixXd out(1, 1);
  out(0, 0) = val(ia).mean();
  return push(std::move(out), needs_grad(a), [ia, inv_n](Tape& t, int o) {
    if (t.nodes_[ia].requires_grad)
      t.acc(ia).array() += t.adj(o)(0, 0) * inv_n;
  });
}

void Tape::backward(Value loss) {
  check_owned(loss, "backward");
  const Node& ln = nodes_[loss.id];
  if (ln.value.rows() != 1 || ln.value.cols() != 1)
    fail(ErrorKind::invalid_argument,
         "backward: loss must be a 1x1 scalar, got " + shape_str(ln.value));
  if (!std::isfinite(ln.value(0, 0)))
    fail(ErrorKind::numeric, "backward: loss is not finite");
  acc(loss.id)(0, 0) = 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.adjoint.size() == 0 || !n.backprop) continue;
    n.backprop(*this, id);
  }
}

Value cmul(Value a, const Eigen::MatrixXd& weights) {
  return a.tape->mul(a, a.tape->input(weights, false));
}

Value cadd(Value a, const Eigen::MatrixXd& c) {
  return a.tape->add(a, a.tape->input(c, false));
}

Value csub(const Eigen::MatrixXd& c, Value a) {
  return a.tape->sub(a.tape->input(c, false), a);
}

GradCheckResult check_gradient(
    const std::function<Value(Tape&, const std::vector<Value>&)>& build,
    const std::vector<Eigen::MatrixXd>& params, double h,
    int max_probes_per_param, uint64_t probe_seed) {
  for (const auto& p : params)
    if (!p.allFinite())
      fail(ErrorKind::numeric, "check_gradient: parameters must be finite");

  auto eval = [&](const std::vector<Eigen::MatrixXd>& values,
                  bool with_grad, std::vector<Eigen::MatrixXd>* grads) {
    Tape tape;
    std::vector<Value> leaves(values.size());
    for (size_t i = 0; i < values.size(); ++i)
      leaves[i] = tape.input(values[i], with_grad);
    Value loss = build(tape, leaves);
    const double l = tape.value(loss)(0, 0);
    if (!std::isfinite(l))
      fail(ErrorKind::numeric, "check_gradient: loss is not finite");
    if (with_grad) {
      tape.backward(loss);
      grads->clear();
      for (Value v : leaves) grads->push_back(tape.adjoint(v));
    }
    return l;
  };

  std::vector<Eigen::MatrixXd> grads;
  eval(params, true, &grads);

  GradCheckResult result;
  std::vector<Eigen::MatrixXd> probe = params;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    const Eigen::Index count = params[pi].size();
    std::vector<Eigen::Index> elems;
    if (max_probes_per_param < 0 || count <= max_probes_per_param) {
      elems.resize(count);
      for (Eigen::Index e = 0; e < count; ++e) elems[e] = e;
    } else {
      uint64_t ctr = 0;
      const uint64_t seed = mix_seed(probe_seed, pi);
      while (static_cast<int>(elems.size()) < max_probes_per_param) {
        Eigen::Index e = static_cast<Eigen::Index>(
            splitmix64(mix_seed(seed, ctr++)) % static_cast<uint64_t>(count));
        if (std::find(elems.begin(), elems.end(), e) == elems.end())
          elems.push_back(e);
      }
    }
    for (Eigen::Index e : elems) {
      double* slot = probe[pi].data() + e;
      const double saved = *slot;
      *slot = saved + h;
      const double lp = eval(probe, false, nullptr);
      *slot = saved - h;
      const double lm = eval(probe, false, nullptr);
      *slot = saved;
      const double fd = (lp - lm) / (2.0 * h);
      const double an = grads[pi].data()[e];
      const double rel = std::abs(an - fd) /
                         std::max({std::abs(an), std::abs(fd), 1e-12});
      result.max_rel_error = std::max(result.max_rel_error, rel);
      ++result.probes;
    }
  }
  return result;
}

}  // namespace tdcr::ad
