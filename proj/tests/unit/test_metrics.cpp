// SPDX-License-Identifier: Apache-2.0
#include "helpers.hpp"
#include "oracles.hpp"

#include "tabllp/metrics/metrics.hpp"

#include <doctest.h>

#include <sstream>

using namespace tabllp;
using namespace tabllp::metrics;
using Eigen::RowVector2d;

TEST_CASE("auc examples") {
  const std::vector<double> a{0.9, 0.8, 0.3, 0.1}, b{0.5, 0.5}, c{0.2, 0.9, 0.6, 0.4};
  const std::vector<int> la{1, 1, 0, 0}, lb{1, 0};
  CHECK(auc(a, la) == 1.0);
  CHECK(auc(b, lb) == 0.5);
  // 2 of the 4 positive-negative pairs are ordered correctly here
  CHECK(auc(c, la) == 0.5);
  CHECK(auc(std::vector<double>{0.5, 0.9, 0.6, 0.4}, la) == 0.75);
  CHECK_THROWS_WITH_AS(auc(b, std::vector<int>{1, 1}), doctest::Contains("AUC undefined"), std::invalid_argument);
}

TEST_CASE("auc matches brute force and ignores monotone transforms") {
  testing::Rng rng(1);
  std::uniform_int_distribution<int> size(2, 200), grid(0, 9);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = size(rng);
    std::vector<double> scores(static_cast<std::size_t>(n)), mapped(scores.size());
    std::vector<int> labels(scores.size());
    for (int i = 0; i < n; ++i) {
      scores[static_cast<std::size_t>(i)] = trial % 2 ? grid(rng) / 10.0 : std::uniform_real_distribution<>(0, 1)(rng);
      labels[static_cast<std::size_t>(i)] = i < 1 ? 0 : i < 2 ? 1 : grid(rng) % 2;
      mapped[static_cast<std::size_t>(i)] = std::exp(3.0 * scores[static_cast<std::size_t>(i)]) - 7.0;
    }
    const double got = auc(scores, labels);
    CHECK(got == testing::brute_force_auc(scores, labels));
    CHECK(auc(mapped, labels) == got);
  }
}

TEST_CASE("accuracy examples") {
  const std::vector<int> y{0, 1, 2, 1};
  CHECK(accuracy(y, y) == 1.0);
  CHECK(accuracy(std::vector<int>{1, 2, 0, 0}, y) == 0.0);
  CHECK(accuracy(std::vector<int>{0, 1, 2, 0}, y) == 0.75);
  CHECK_THROWS_AS(accuracy(std::vector<int>{}, std::vector<int>{}), std::invalid_argument);
}

TEST_CASE("l1 and mpiou examples") {
  CHECK(l1_bag(RowVector2d(0.3, 0.7), RowVector2d(0.3, 0.7)) == 0.0);
  CHECK(l1_bag(RowVector2d(1, 0), RowVector2d(0, 1)) == 2.0);
  CHECK(l1_bag(RowVector2d(0.6, 0.4), RowVector2d(0.5, 0.5)) == doctest::Approx(0.2));
  CHECK(mpiou(RowVector2d(0.3, 0.7), RowVector2d(0.3, 0.7)) == 1.0);
  CHECK(mpiou(RowVector2d(0.6, 0.4), RowVector2d(0.5, 0.5)) == doctest::Approx(0.816667).epsilon(1e-6));
  CHECK(mpiou(RowVector2d(1, 0), RowVector2d(0, 1)) == 0.0);
  // a class absent from both sides is ignored
  CHECK(mpiou(Eigen::RowVector3d(0.5, 0.5, 0), Eigen::RowVector3d(0.5, 0.5, 0)) == 1.0);
  CHECK_THROWS_AS(mpiou(RowVector2d(0, 0), RowVector2d(0, 0)), std::invalid_argument);
}

TEST_CASE("bag metric invariants") {
  testing::Rng rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index c = 2 + trial % 4;
    auto a = testing::random_proportion(c, rng).entries;
    auto b = testing::random_proportion(c, rng).entries;
    if (trial % 5 == 0) {
      a(0) = 0.0;
      a /= a.sum();
    }
    const double m = mpiou(a, b);
    CHECK(m == mpiou(b, a));
    CHECK(m >= 0.0);
    CHECK(m <= 1.0);
    CHECK(mpiou(a, a) == 1.0);
    CHECK(m < 1.0);
    const double l = l1_bag(a, b);
    CHECK(l >= 0.0);
    CHECK(l <= 2.0 + 1e-12);
  }
}

TEST_CASE("cas examples") {
  Eigen::MatrixXd same(4, 2);
  same << 1, 0, 1, 0, 1, 0, 1, 0;
  const std::vector<int> labels{0, 0, 1, 1};
  CHECK(cas(same, labels).score == doctest::Approx(0.5));

  Eigen::MatrixXd apart(4, 2);
  apart << 1, 0, 1, 0, -1, 0, -1, 0;
  CHECK(cas(apart, labels).score == doctest::Approx(1.0));

  Eigen::MatrixXd right(4, 2);
  right << 1, 0, 1, 0, 0, 1, 0, 1;
  const auto r = cas(right, labels);
  CHECK(r.intra == doctest::Approx(1.0));
  CHECK(r.inter == doctest::Approx(0.0));
  CHECK(r.score == doctest::Approx(2.0 / 3.0));

  // both standardised similarities are zero
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(4, 2);
  zero(0, 0) = 1;
  zero(1, 0) = -1;
  zero(2, 1) = 1;
  zero(3, 1) = -1;
  CHECK_NOTHROW(cas(zero, labels));
  CHECK_THROWS_AS(cas(same, std::vector<int>{1, 1, 1, 1}), std::invalid_argument);
}

TEST_CASE("report writers") {
  MetricsReport report;
  report.values["auc"] = 0.75;
  report.bags.push_back({0, 0.5, 0.25});
  std::ostringstream table, records;
  write_table(table, report);
  write_records(records, report);
  CHECK(table.str().find("auc") != std::string::npos);
  CHECK(records.str().find("\"metric\"") != std::string::npos);
  CHECK(records.str().find("\"bag\"") != std::string::npos);
}
