// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tabllp/data/dataset.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tabllp::data {

enum class BagStrategy { Random, Ordered };

std::string to_string(BagStrategy s);
BagStrategy parse_bag_strategy(const std::string& text);

/// Empirical class frequencies of `members`. Reads labels: this stands in
/// for the black-box proportion provider.
LabelProportion empirical_proportion(const TabularDataset& dataset, std::span<const Index> members,
                                     int num_classes);

/// Chunks `rows` into bags of exactly `bag_size`, dropping the remainder.
/// Random: seeded shuffle first. Ordered: lexicographic sort over the
/// feature vector in column order, ties broken by row index.
std::vector<Bag> make_bags(const TabularDataset& dataset, std::span<const Index> rows,
                           Index bag_size, BagStrategy strategy, std::uint64_t seed);

using BagPair = std::pair<std::size_t, std::size_t>;

/// Seeded random perfect matching over `num_bags` bag ids; with an odd count
/// one bag sits out.
std::vector<BagPair> pair_bags(std::size_t num_bags, std::uint64_t seed);

}  // namespace tabllp::data
