#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

namespace tdcr::ad {

class Tape;

// Handle to a node on a Tape. Cheap to copy; invalidated by Tape::reset().
struct Value {
  Tape* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
};

// Reverse-mode tape over dense float64 matrices (define-by-run). A tape is
// single-threaded; build a fresh one per rollout.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf nodes. Parameters get requires_grad = true.
  Value input(Eigen::MatrixXd v, bool requires_grad = false);
  Value scalar(double s);

  // Primitive operations.
  Value matmul(Value a, Value b);
  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value scalar_mul(double s, Value a);
  Value mul(Value a, Value b);  // elementwise
  Value concat_rows(const std::vector<Value>& parts);
  Value slice_rows(Value a, int start, int count);
  Value tanh(Value a);
  Value relu(Value a);
  // y = gain .* (x - mean) / sqrt(var + eps) + bias, per column vector x.
  Value layer_norm(Value x, Value gain, Value bias, double eps = 1e-5);
  // Inverted dropout: at train time keeps units with prob (1 - rate) scaled
  // by 1/(1 - rate); identity when train is false. Mask is a pure function
  // of the seed.
  Value dropout(Value a, double rate, bool train, uint64_t seed);
  Value clip(Value a, double lo, double hi);
  // Shifts each selected component by a multiple of 2*pi into (-pi, pi],
  // frozen at record time; gradient passes through unchanged. An empty mask
  // wraps every component.
  Value wrap_angle(Value a, const std::vector<bool>& component_mask = {});
  Value square(Value a);
  Value sum(Value a);   // 1x1
  Value mean(Value a);  // 1x1

  // Runs the backward pass from a scalar loss node; adjoints accumulate on
  // every node that (transitively) requires gradients.
  void backward(Value loss);

  const Eigen::MatrixXd& value(Value v) const;
  // Adjoint of a node after backward(); zero matrix if the node was never
  // reached.
  Eigen::MatrixXd adjoint(Value v) const;

  int rows(Value v) const { return static_cast<int>(value(v).rows()); }
  int cols(Value v) const { return static_cast<int>(value(v).cols()); }
  int size() const { return static_cast<int>(nodes_.size()); }

  // Discards all nodes; existing Value handles become invalid.
  void reset();

 private:
  // out is the id of the node whose adjoint is being propagated.
  using Backprop = std::function<void(Tape&, int out)>;

  struct Node {
    Eigen::MatrixXd value;
    Eigen::MatrixXd adjoint;  // empty until touched by backward
    bool requires_grad = false;
    Backprop backprop;  // empty for leaves
  };

  Value push(Eigen::MatrixXd value, bool requires_grad, Backprop backprop);
  void check_owned(Value v, const char* op) const;
  bool needs_grad(Value v) const { return nodes_[v.id].requires_grad; }
  const Eigen::MatrixXd& val(int id) const { return nodes_[id].value; }
  const Eigen::MatrixXd& adj(int id) const { return nodes_[id].adjoint; }
  // Adjoint accumulation buffer, zero-initialized on first use.
  Eigen::MatrixXd& acc(int id);

  std::vector<Node> nodes_;
};

// Convenience: elementwise multiply by a constant vector/matrix.
Value cmul(Value a, const Eigen::MatrixXd& weights);
// Convenience: add a constant.
Value cadd(Value a, const Eigen::MatrixXd& c);
// Convenience: subtract from a constant (c - a).
Value csub(const Eigen::MatrixXd& c, Value a);

struct GradCheckResult {
  double max_rel_error = 0.0;
  int probes = 0;
};

// Builds the loss twice per probed element and compares central finite
// differences against the tape gradient. `build` must be deterministic in the
// parameter values. Probes every element when a parameter has at most
// `max_probes_per_param` entries (or when the limit is < 0), otherwise a
// seeded subsample of that size.
GradCheckResult check_gradient(
    const std::function<Value(Tape&, const std::vector<Value>&)>& build,
    const std::vector<Eigen::MatrixXd>& params, double h,
    int max_probes_per_param = -1, uint64_t probe_seed = 0);

}  // namespace tdcr::ad
