// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tabllp/data/dataset.hpp"
#include "tabllp/diff/gradcheck.hpp"
#include "tabllp/diff/ops.hpp"

#include <Eigen/Dense>

#include <functional>
#include <random>

namespace tabllp::testing {

using Rng = std::mt19937_64;

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double lo = -1.0,
                                     double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = u(rng);
  return m;
}

inline diff::Tensor param(Eigen::Index rows, Eigen::Index cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  return diff::Tensor(random_matrix(rows, cols, rng, lo, hi), true);
}

/// Random strictly positive proportion vector.
inline data::LabelProportion random_proportion(Eigen::Index classes, Rng& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Eigen::RowVectorXd p(classes);
  for (Eigen::Index c = 0; c < classes; ++c) p(c) = u(rng);
  return {p / p.sum()};
}

/// Proportion of an integer class histogram.
inline data::LabelProportion counts_proportion(std::initializer_list<int> counts) {
  Eigen::RowVectorXd p(static_cast<Eigen::Index>(counts.size()));
  Eigen::Index c = 0;
  double total = 0.0;
  for (int n : counts) total += n;
  for (int n : counts) p(c++) = n / total;
  return {p};
}

/// Builds the loss, and rejects configurations whose relu inputs come within
/// `margin` of a kink. Returns false when the configuration is rejected.
inline bool smooth_enough(const std::function<diff::Tensor()>& build, double margin = 1e-3) {
  return diff::kink_margin(build()) > margin;
}

}  // namespace tabllp::testing
