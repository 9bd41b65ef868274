// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tabllp/diff/tensor.hpp"

#include <functional>
#include <string>
#include <vector>

namespace tabllp::diff {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

struct GradCheckEntry {
  std::string name;
  Scalar max_rel_error = 0.0;
  bool pass = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  bool pass = true;
  Scalar max_rel_error = 0.0;
};

struct GradCheckOptions {
  Scalar step = 1e-5;
  Scalar tol = 1e-4;
  /// Relative error is |a - n| / max(|a|, |n|, floor).
  Scalar floor = 1e-3;
};

/// Compares analytic gradients of `build_loss()` with central differences
/// for every parameter. The builder must be deterministic in the parameter
/// values; two disagreeing forward passes throw std::runtime_error.
/// Parameter values are restored on exit and their grads are left cleared.
GradCheckReport check_gradients(const std::function<Tensor()>& build_loss,
                                std::vector<NamedTensor> params,
                                const GradCheckOptions& options = {});

}  // namespace tabllp::diff
