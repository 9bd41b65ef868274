// SPDX-License-Identifier: Apache-2.0
#include "tabllp/pairing/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

namespace tabllp::pairing {

namespace {

void check_square_finite(const Matrix& s, const char* who) {
  if (s.rows() != s.cols()) {
    throw std::invalid_argument(std::string(who) + ": similarity matrix must be square, got " +
                                std::to_string(s.rows()) + "x" + std::to_string(s.cols()));
  }
  if (!s.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite similarity entry");
}

struct Solution {
  Permutation row_to_col;
  Eigen::VectorXd u;  // row potentials
  Eigen::VectorXd v;  // column potentials
};

// Shortest-augmenting-path Hungarian for min-cost assignment; reduced costs
// cost(i, j) - u(i) - v(j) are >= 0 and vanish on the matching.
Solution hungarian_min(const Matrix& cost) {
  const Index n = cost.rows();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<Index> p(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<bool> used(static_cast<std::size_t>(n + 1), false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const Index i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        if (used[uj]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[uj];
        if (cur < minv[uj]) {
          minv[uj] = cur;
          way[uj] = j0;
        }
        if (minv[uj] < delta) {
          delta = minv[uj];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        if (used[uj]) {
          u[static_cast<std::size_t>(p[uj])] += delta;
          v[uj] -= delta;
        } else {
          minv[uj] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  Solution sol;
  sol.row_to_col.assign(static_cast<std::size_t>(n), 0);
  for (Index j = 1; j <= n; ++j) sol.row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  sol.u.resize(n);
  sol.v.resize(n);
  for (Index i = 0; i < n; ++i) {
    sol.u(i) = u[static_cast<std::size_t>(i + 1)];
    sol.v(i) = v[static_cast<std::size_t>(i + 1)];
  }
  return sol;
}

// Rewrites `mapping` into the lexicographically smallest perfect matching
// of the tight-edge graph, which contains every optimal assignment.
class TightRefiner {
 public:
  TightRefiner(const std::vector<std::vector<Index>>& tight, Permutation mapping)
      : tight_(tight), row_to_col_(std::move(mapping)), col_to_row_(row_to_col_.size()) {
    for (std::size_t i = 0; i < row_to_col_.size(); ++i) col_to_row_[static_cast<std::size_t>(row_to_col_[i])] = static_cast<Index>(i);
  }

  Permutation run() {
    const auto n = static_cast<Index>(row_to_col_.size());
    std::vector<bool> col_fixed(static_cast<std::size_t>(n), false);
    for (Index i = 0; i < n; ++i) {
      for (Index j : tight_[static_cast<std::size_t>(i)]) {
        if (col_fixed[static_cast<std::size_t>(j)]) continue;
        if (j == row_to_col_[static_cast<std::size_t>(i)] || reroute(i, j, col_fixed)) break;
      }
      col_fixed[static_cast<std::size_t>(row_to_col_[static_cast<std::size_t>(i)])] = true;
    }
    return row_to_col_;
  }

 private:
  // Moves row i onto column j by finding an alternating path that re-seats
  // j's owner somewhere, ending at i's old column. Rows < i are frozen.
  bool reroute(Index i, Index j, const std::vector<bool>& col_fixed) {
    const Index freed = row_to_col_[static_cast<std::size_t>(i)];
    const Index owner = col_to_row_[static_cast<std::size_t>(j)];
    visited_.assign(row_to_col_.size(), false);
    visited_[static_cast<std::size_t>(j)] = true;
    path_.clear();
    if (!augment(owner, freed, col_fixed)) return false;
    // path_ holds (row, new column) moves for the displaced rows.
    for (auto [r, c] : path_) {
      row_to_col_[static_cast<std::size_t>(r)] = c;
      col_to_row_[static_cast<std::size_t>(c)] = r;
    }
    row_to_col_[static_cast<std::size_t>(i)] = j;
    col_to_row_[static_cast<std::size_t>(j)] = i;
    return true;
  }

  bool augment(Index row, Index target, const std::vector<bool>& col_fixed) {
    for (Index c : tight_[static_cast<std::size_t>(row)]) {
      const auto uc = static_cast<std::size_t>(c);
      if (visited_[uc] || col_fixed[uc]) continue;
      visited_[uc] = true;
      if (c == target || augment(col_to_row_[uc], target, col_fixed)) {
        path_.emplace_back(row, c);
        return true;
      }
    }
    return false;
  }

  const std::vector<std::vector<Index>>& tight_;
  Permutation row_to_col_;
  Permutation col_to_row_;
  std::vector<bool> visited_;
  std::vector<std::pair<Index, Index>> path_;
};

}  // namespace

Permutation solve_lsa(const Matrix& s) {
  check_square_finite(s, "solve_lsa");
  const Index n = s.rows();
  if (n == 0) return {};

  const Matrix cost = -s;
  Solution sol = hungarian_min(cost);

  const double tol = 1e-9 * (1.0 + s.cwiseAbs().maxCoeff());
  std::vector<std::vector<Index>> tight(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (std::abs(cost(i, j) - sol.u(i) - sol.v(j)) <= tol) tight[static_cast<std::size_t>(i)].push_back(j);
    }
  }
  // Matched edges are tight by construction; guard against rounding.
  for (Index i = 0; i < n; ++i) {
    auto& row = tight[static_cast<std::size_t>(i)];
    const Index j = sol.row_to_col[static_cast<std::size_t>(i)];
    if (std::find(row.begin(), row.end(), j) == row.end()) row.insert(std::lower_bound(row.begin(), row.end(), j), j);
  }

  Permutation refined = TightRefiner(tight, sol.row_to_col).run();
  if (assignment_sum(s, refined) >= assignment_sum(s, sol.row_to_col)) return refined;
  return sol.row_to_col;
}

Permutation solve_greedy(const Matrix& s) {
  check_square_finite(s, "solve_greedy");
  const Index n = s.rows();
  std::vector<std::tuple<double, Index, Index>> entries;
  entries.reserve(static_cast<std::size_t>(n * n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) entries.emplace_back(-s(i, j), i, j);
  }
  std::sort(entries.begin(), entries.end());
  Permutation mapping(static_cast<std::size_t>(n), -1);
  std::vector<bool> col_used(static_cast<std::size_t>(n), false);
  Index placed = 0;
  for (const auto& [neg, i, j] : entries) {
    if (mapping[static_cast<std::size_t>(i)] >= 0 || col_used[static_cast<std::size_t>(j)]) continue;
    mapping[static_cast<std::size_t>(i)] = j;
    col_used[static_cast<std::size_t>(j)] = true;
    if (++placed == n) break;
  }
  return mapping;
}

}  // namespace tabllp::pairing
