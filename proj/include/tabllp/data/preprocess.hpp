// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tabllp/data/dataset.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace tabllp::data {

/// Standardises numeric columns with population mean/std fit on `fit_rows`
/// (missing cells excluded; zero std scales by 1) and re-indexes categorical
/// levels by first appearance within `fit_rows`. Missing cells and levels
/// unseen in the fit rows map to the reserved index `cardinality` and are
/// flagged missing. An all-missing column on the fit rows throws
/// std::invalid_argument naming the column.
TabularDataset preprocess(const TabularDataset& dataset, std::span<const Index> fit_rows);

struct SplitIndices {
  std::vector<Index> train;
  std::vector<Index> test;
  std::vector<Index> validation;
};

/// Seeded shuffle of all rows into train/test/validation with sizes
/// round(f0 * n), round(f1 * n) and the remainder.
SplitIndices split(Index rows, std::array<double, 3> fractions, std::uint64_t seed);

}  // namespace tabllp::data
