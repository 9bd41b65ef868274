// SPDX-License-Identifier: Apache-2.0
#include "helpers.hpp"
#include "oracles.hpp"

#include "tabllp/pairing/pairing.hpp"

#include <doctest.h>

#include <numeric>
#include <set>
#include <sstream>

using namespace tabllp;
using namespace tabllp::pairing;
using data::LabelProportion;

namespace {

LabelProportion prop(double a, double b) { return {Eigen::RowVector2d(a, b)}; }

const Matrix& example() {
  static const Matrix s = (Matrix(3, 3) << 0.9, 0.1, 0.2, 0.3, 0.8, 0.1, 0.2, 0.4, 0.7).finished();
  return s;
}

Permutation identity(Index m) {
  Permutation p(static_cast<std::size_t>(m));
  std::iota(p.begin(), p.end(), Index{0});
  return p;
}

double objective(const Matrix& s, const Permutation& pi, Index n) {
  const auto pos = select_positives(s, pi, n);
  const auto neg = remaining_pairs(pi, pos);
  double v = 0.0;
  for (auto [i, j] : pos) v += s(i, j);
  for (auto [i, j] : neg) v -= s(i, j);
  return v;
}

}  // namespace

TEST_CASE("n_pos examples and symmetry") {
  CHECK(n_pos(prop(0.5, 0.5), prop(0.25, 0.75), 4) == 3);
  CHECK(n_pos(prop(0.3, 0.7), prop(0.3, 0.7), 10) == 10);
  CHECK(n_pos(prop(1, 0), prop(0, 1), 8) == 0);
  testing::Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = testing::random_proportion(3, rng), b = testing::random_proportion(3, rng);
    const Index m = 1 + trial % 64;
    CHECK(n_pos(a, b, m) == n_pos(b, a, m));
    CHECK(n_pos(a, a, m) == m);
    CHECK(n_pos(a, b, m) >= 0);
    CHECK(n_pos(a, b, m) <= m);
  }
}

TEST_CASE("similarity matrix") {
  const Matrix eye = Matrix::Identity(4, 4);
  CHECK(similarity_matrix(eye, eye) == eye);
  testing::Rng rng(2);
  const Matrix z = testing::random_matrix(5, 3, rng);
  const Matrix s = similarity_matrix(z, z);
  for (Index i = 0; i < 5; ++i) CHECK(s(i, i) == doctest::Approx(1.0));
  const Matrix anti = similarity_matrix(z, Matrix(-z));
  for (Index i = 0; i < 5; ++i) CHECK(anti(i, i) == doctest::Approx(-1.0));
  Matrix with_zero = z;
  with_zero.row(2).setZero();
  CHECK(similarity_matrix(with_zero, z).row(2).isZero());
  CHECK_THROWS_AS(similarity_matrix(z, Matrix(testing::random_matrix(4, 3, rng))), std::invalid_argument);
}

TEST_CASE("solve_lsa examples") {
  const auto pi = solve_lsa(example());
  CHECK(pi == identity(3));
  CHECK(assignment_sum(example(), pi) == doctest::Approx(2.4));
  CHECK(solve_lsa(Matrix::Identity(5, 5)) == identity(5));
  CHECK(solve_lsa(Matrix::Constant(6, 6, 0.3)) == identity(6));
  CHECK_THROWS_AS(solve_lsa(Matrix::Zero(2, 3)), std::invalid_argument);
  Matrix bad = Matrix::Zero(2, 2);
  bad(1, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(solve_lsa(bad), std::invalid_argument);
  CHECK(solve_lsa(Matrix(0, 0)).empty());
}

TEST_CASE("solve_lsa matches brute force") {
  testing::Rng rng(3);
  for (Index m = 1; m <= 7; ++m) {
    for (int trial = 0; trial < 200; ++trial) {
      CAPTURE(m);
      CAPTURE(trial);
      Matrix s = testing::random_matrix(m, m, rng);
      // Coarse grids force many ties.
      if (trial % 3 == 0) s = (s * 2.0).array().round() / 2.0;
      const auto brute = testing::brute_force_lsa(s);
      const auto pi = solve_lsa(s);
      std::set<Index> cols(pi.begin(), pi.end());
      CHECK(cols.size() == static_cast<std::size_t>(m));
      CHECK(assignment_sum(s, pi) == brute.best_sum);
      CHECK(pi == brute.first_best);
    }
  }
}

TEST_CASE("select_positives") {
  const auto pi = identity(3);
  const PairList two{{0, 0}, {1, 1}};
  CHECK(select_positives(example(), pi, 2) == two);
  CHECK(select_positives(example(), pi, 3).size() == 3);
  CHECK(select_positives(example(), pi, 0).empty());
  // ties go to the smaller row
  const PairList first{{0, 0}};
  CHECK(select_positives(Matrix::Constant(3, 3, 0.5), pi, 1) == first);

  testing::Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = 2 + trial % 10;
    const Matrix s = testing::random_matrix(m, m, rng);
    const auto p = solve_lsa(s);
    const Index n = trial % (m + 1);
    const auto pos = select_positives(s, p, n);
    const auto neg = remaining_pairs(p, pos);
    CHECK(static_cast<Index>(pos.size()) == n);
    CHECK(static_cast<Index>(pos.size() + neg.size()) == m);
    for (auto [i, j] : pos) CHECK(p[static_cast<std::size_t>(i)] == j);
  }
}

TEST_CASE("solve_greedy") {
  const Matrix s = (Matrix(2, 2) << 0.9, 0.1, 0.95, 0.2).finished();
  const auto g = solve_greedy(s);
  CHECK(g == Permutation{1, 0});
  CHECK(assignment_sum(s, g) == doctest::Approx(1.05));
  CHECK(assignment_sum(s, solve_lsa(s)) == doctest::Approx(1.1));
  CHECK(solve_greedy(example()) == solve_lsa(example()));
  CHECK(solve_greedy(Matrix::Constant(4, 4, -0.2)) == identity(4));

  testing::Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const Index m = 1 + trial % 12;
    const Matrix r = testing::random_matrix(m, m, rng);
    CHECK(assignment_sum(r, solve_greedy(r)) <= assignment_sum(r, solve_lsa(r)) + 1e-12);
  }
}

TEST_CASE("pair_accuracy") {
  const std::vector<int> a{0, 1, 1}, b{0, 1, 1};
  CHECK(pair_accuracy({{0, 0}, {1, 2}}, a, b).value == 1.0);
  const auto empty = pair_accuracy({}, a, b);
  CHECK(empty.value == 1.0);
  CHECK(empty.empty);
  const std::vector<int> c{0, 1}, d{1, 0};
  CHECK(pair_accuracy({{0, 0}, {1, 1}}, c, d).value == 0.0);
  CHECK(pair_accuracy({{0, 1}, {1, 1}}, c, d).value == 0.5);
}

TEST_CASE("relaxation gap against the unrelaxed objective") {
  // LSA plus top-n_pos selection is a feasible point of the unrelaxed
  // objective, so it can never beat the brute-force optimum; record how
  // often it attains it.
  testing::Rng rng(6);
  int attained = 0, total = 0;
  for (Index m = 2; m <= 6; ++m) {
    for (int trial = 0; trial < 40; ++trial) {
      const Matrix s = testing::random_matrix(m, m, rng);
      const Index n = trial % (m + 1);
      const double best = testing::brute_force_pair_objective(s, n);
      const double relaxed = objective(s, solve_lsa(s), n);
      CHECK(relaxed <= best + 1e-12);
      attained += std::abs(relaxed - best) < 1e-12;
      ++total;
    }
  }
  MESSAGE("relaxation attains the unrelaxed optimum in " << attained << " of " << total << " cases");
  CHECK(attained > 0);
}

TEST_CASE("assignment dump lists S, the mapping and positives") {
  std::ostringstream out;
  write_assignment_dump(out, example(), identity(3), {{0, 0}});
  const std::string text = out.str();
  CHECK(text.find("0.9") != std::string::npos);
  CHECK(text.find("positives") != std::string::npos);
}
