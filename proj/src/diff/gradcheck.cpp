// SPDX-License-Identifier: Apache-2.0
#include "tabllp/diff/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tabllp::diff {

GradCheckReport check_gradients(const std::function<Tensor()>& build_loss,
                                std::vector<NamedTensor> params,
                                const GradCheckOptions& options) {
  if (!(options.step > 0.0)) throw std::invalid_argument("check_gradients: step must be > 0");

  GradCheckReport report;
  if (params.empty()) return report;

  for (auto& p : params) p.tensor.zero_grad();
  const Tensor loss = build_loss();
  const Scalar base = loss.item();
  if (build_loss().item() != base) {
    throw std::runtime_error("check_gradients: loss builder is non-deterministic");
  }
  backward(loss);

  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (auto& p : params) {
    analytic.push_back(p.tensor.has_grad() ? p.tensor.grad()
                                           : Matrix::Zero(p.tensor.rows(), p.tensor.cols()));
    p.tensor.zero_grad();
  }

  const Scalar h = options.step;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& value = params[k].tensor.mutable_value();
    GradCheckEntry entry{params[k].name, 0.0, true};
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      const Scalar saved = value.data()[i];
      value.data()[i] = saved + h;
      const Scalar up = build_loss().item();
      value.data()[i] = saved - h;
      const Scalar down = build_loss().item();
      value.data()[i] = saved;
      const Scalar numeric = (up - down) / (2.0 * h);
      const Scalar a = analytic[k].data()[i];
      const Scalar denom = std::max({std::abs(a), std::abs(numeric), options.floor});
      const Scalar rel = std::abs(a - numeric) / denom;
      entry.max_rel_error = std::max(entry.max_rel_error, std::isfinite(rel) ? rel : INFINITY);
    }
    entry.pass = entry.max_rel_error < options.tol;
    report.pass = report.pass && entry.pass;
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace tabllp::diff
