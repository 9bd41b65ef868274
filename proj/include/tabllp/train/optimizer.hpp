// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tabllp/model/encoder.hpp"

#include <map>
#include <string>

namespace tabllp::train {

/// Adam with bias-corrected first and second moments. State is keyed by
/// parameter name, so the same optimizer can be handed the same list each
/// step.
class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  /// Applies one update to every parameter that holds a gradient. Throws
  /// std::runtime_error on a non-finite gradient (nothing is updated).
  void step(const model::ParamList& params);

  long long steps() const { return t_; }
  double learning_rate() const { return lr_; }

 private:
  struct Moments {
    diff::Matrix m;
    diff::Matrix v;
  };
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
  std::map<std::string, Moments> state_;
};

void zero_grads(const model::ParamList& params);

}  // namespace tabllp::train
