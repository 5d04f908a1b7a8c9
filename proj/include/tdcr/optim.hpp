#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "tdcr/errors.hpp"

namespace tdcr {

// Adaptive-moment gradient descent with global-norm gradient clipping.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const std::vector<Eigen::MatrixXd*>& params,
            const std::vector<Eigen::MatrixXd>& grads, double grad_clip) {
    if (params.size() != grads.size())
      fail(ErrorKind::invalid_argument, "optimizer: params/grads size mismatch");
    if (m_.empty()) {
      for (auto* p : params) {
        m_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
        v_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
      }
    }
    double norm_sq = 0.0;
    for (const auto& g : grads) norm_sq += g.squaredNorm();
    const double norm = std::sqrt(norm_sq);
    const double scale = (grad_clip > 0.0 && norm > grad_clip) ? grad_clip / norm : 1.0;
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (size_t i = 0; i < params.size(); ++i) {
      const Eigen::MatrixXd g = grads[i] * scale;
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
      const Eigen::MatrixXd mhat = m_[i] / bc1;
      const Eigen::MatrixXd vhat = v_[i] / bc2;
      params[i]->array() -= lr_ * mhat.array() / (vhat.array().sqrt() + eps_);
    }
    last_grad_norm_ = norm;
  }

  double last_grad_norm() const { return last_grad_norm_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  double last_grad_norm_ = 0.0;
  std::vector<Eigen::MatrixXd> m_, v_;
};

}  // namespace tdcr
