// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tabllp/data/dataset.hpp"

#include <Eigen/Dense>

#include <ostream>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace tabllp::pairing {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
/// mapping[i] = column matched to row i.
using Permutation = std::vector<Index>;
using PairList = std::vector<std::pair<Index, Index>>;

/// round-half-up(m * sum_c min(p1_c, p2_c)), clamped to [0, m].
Index n_pos(const data::LabelProportion& p1, const data::LabelProportion& p2, Index m);

/// S_ij = cos(z1_i, z2_j); zero rows give 0.
template <typename D1, typename D2>
Matrix similarity_matrix(const Eigen::MatrixBase<D1>& z1, const Eigen::MatrixBase<D2>& z2) {
  if (z1.rows() != z2.rows() || z1.cols() != z2.cols()) {
    throw std::invalid_argument("similarity_matrix: bags must have equal size and width");
  }
  auto unit = [](const auto& z) {
    Matrix u = z;
    for (Index r = 0; r < u.rows(); ++r) {
      const double n = u.row(r).norm();
      if (n < 1e-12) {
        u.row(r).setZero();
      } else {
        u.row(r) /= n;
      }
    }
    return u;
  };
  Matrix s = unit(z1) * unit(z2).transpose();
  return s.cwiseMax(-1.0).cwiseMin(1.0);
}

template <typename Derived>
double assignment_sum(const Eigen::MatrixBase<Derived>& s, const Permutation& mapping) {
  double total = 0.0;
  for (std::size_t i = 0; i < mapping.size(); ++i) total += s(static_cast<Index>(i), mapping[i]);
  return total;
}

/// Maximum-weight perfect matching (Hungarian with potentials on -S, O(m^3)).
/// Among optimal permutations the lexicographically smallest is returned.
/// Throws for non-square or non-finite input.
Permutation solve_lsa(const Matrix& s);

/// Repeatedly takes the largest unused entry; ties go to the smaller row,
/// then the smaller column.
Permutation solve_greedy(const Matrix& s);

/// The n_pos matched pairs (i, mapping[i]) with the highest similarity,
/// ties to smaller i; returned in ascending row order.
PairList select_positives(const Matrix& s, const Permutation& mapping, Index n_pos);

/// Matched pairs not selected as positives.
PairList remaining_pairs(const Permutation& mapping, const PairList& positives);

struct PairAccuracy {
  double value = 1.0;
  bool empty = false;
};

/// Fraction of pairs whose instances share a label. Empty pair sets give 1
/// with `empty` set.
PairAccuracy pair_accuracy(const PairList& pairs, std::span<const int> labels1,
                           std::span<const int> labels2);

/// Text audit dump of one bag pair: S, the permutation and the positives.
void write_assignment_dump(std::ostream& out, const Matrix& s, const Permutation& mapping,
                           const PairList& positives);

}  // namespace tabllp::pairing
