// SPDX-License-Identifier: Apache-2.0
#include "tabllp/data/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace tabllp::data {

TabularDataset preprocess(const TabularDataset& dataset, std::span<const Index> fit_rows) {
  if (fit_rows.empty()) throw std::invalid_argument("preprocess: fit split is empty");

  auto schema = dataset.schema();
  CellArray values = dataset.values();
  MaskArray missing = dataset.missing();

  for (Index j = 0; j < dataset.cols(); ++j) {
    auto& col = schema[static_cast<std::size_t>(j)];
    if (col.is_categorical()) {
      // Old index -> new dense index, by first appearance among fit rows.
      std::unordered_map<int, int> remap;
      std::vector<std::string> levels;
      for (Index r : fit_rows) {
        if (missing(r, j)) continue;
        const int old = static_cast<int>(values(r, j));
        if (remap.try_emplace(old, static_cast<int>(levels.size())).second) {
          levels.push_back(col.levels.at(static_cast<std::size_t>(old)));
        }
      }
      if (levels.empty()) {
        throw std::invalid_argument("preprocess: column '" + col.name + "' is all missing");
      }
      col.levels = std::move(levels);
      col.cardinality = static_cast<int>(col.levels.size());
      for (Index r = 0; r < values.rows(); ++r) {
        auto it = missing(r, j) ? remap.end() : remap.find(static_cast<int>(values(r, j)));
        if (it == remap.end()) {
          values(r, j) = col.cardinality;
          missing(r, j) = true;
        } else {
          values(r, j) = it->second;
        }
      }
    } else {
      double total = 0.0;
      std::size_t count = 0;
      for (Index r : fit_rows) {
        if (missing(r, j)) continue;
        total += values(r, j);
        ++count;
      }
      if (count == 0) {
        throw std::invalid_argument("preprocess: column '" + col.name + "' is all missing");
      }
      const double mu = total / static_cast<double>(count);
      double sq = 0.0;
      for (Index r : fit_rows) {
        if (!missing(r, j)) sq += (values(r, j) - mu) * (values(r, j) - mu);
      }
      const double sd = std::sqrt(sq / static_cast<double>(count));
      col.mean = mu;
      col.std = sd > 0.0 ? sd : 1.0;
      col.standardized = true;
      for (Index r = 0; r < values.rows(); ++r) {
        values(r, j) = missing(r, j) ? 0.0 : (values(r, j) - col.mean) / col.std;
      }
    }
  }

  return dataset.with_features(std::move(schema), std::move(values), std::move(missing));
}

SplitIndices split(Index rows, std::array<double, 3> fractions, std::uint64_t seed) {
  if (rows < 10) throw std::invalid_argument("split: dataset has fewer than 10 rows");
  for (double f : fractions) {
    if (f < 0.0) throw std::invalid_argument("split: negative fraction");
  }
  if (std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9) {
    throw std::invalid_argument("split: fractions must sum to 1");
  }
  std::vector<Index> order(static_cast<std::size_t>(rows));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n = static_cast<double>(rows);
  const auto n_train = static_cast<std::size_t>(std::llround(fractions[0] * n));
  const auto n_test = std::min(order.size() - n_train, static_cast<std::size_t>(std::llround(fractions[1] * n)));

  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                  order.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
  out.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_test), order.end());
  return out;
}

}  // namespace tabllp::data
