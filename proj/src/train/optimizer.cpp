// SPDX-License-Identifier: Apache-2.0
#include "tabllp/train/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace tabllp::train {

Adam::Adam(double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("adam: learning rate must be > 0");
}

void Adam::step(const model::ParamList& params) {
  for (const auto& p : params) {
    if (p.tensor.has_grad() && !p.tensor.grad().allFinite()) {
      throw std::runtime_error("adam: non-finite gradient in '" + p.name + "'");
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (const auto& p : params) {
    if (!p.tensor.has_grad()) continue;
    const diff::Matrix& g = p.tensor.grad();
    auto [it, fresh] = state_.try_emplace(p.name);
    Moments& s = it->second;
    if (fresh) {
      s.m = diff::Matrix::Zero(g.rows(), g.cols());
      s.v = diff::Matrix::Zero(g.rows(), g.cols());
    }
    s.m = beta1_ * s.m + (1.0 - beta1_) * g;
    s.v = beta2_ * s.v + (1.0 - beta2_) * g.cwiseProduct(g);
    diff::Tensor handle = p.tensor;
    handle.mutable_value().array() -= lr_ * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + eps_);
  }
}

void zero_grads(const model::ParamList& params) {
  for (const auto& p : params) {
    diff::Tensor handle = p.tensor;
    handle.zero_grad();
  }
}

}  // namespace tabllp::train
