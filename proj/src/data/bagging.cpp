// SPDX-License-Identifier: Apache-2.0
#include "tabllp/data/bagging.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace tabllp::data {

std::string to_string(BagStrategy s) { return s == BagStrategy::Random ? "random" : "ordered"; }

BagStrategy parse_bag_strategy(const std::string& text) {
  if (text == "random") return BagStrategy::Random;
  if (text == "ordered") return BagStrategy::Ordered;
  throw std::invalid_argument("unknown bag strategy '" + text + "'");
}

LabelProportion empirical_proportion(const TabularDataset& dataset, std::span<const Index> members,
                                     int num_classes) {
  LabelProportion p{Eigen::RowVectorXd::Zero(num_classes)};
  if (members.empty()) throw std::invalid_argument("empirical_proportion: empty bag");
  for (Index r : members) p.entries(dataset.label(r)) += 1.0;
  p.entries /= static_cast<double>(members.size());
  return p;
}

std::vector<Bag> make_bags(const TabularDataset& dataset, std::span<const Index> rows,
                           Index bag_size, BagStrategy strategy, std::uint64_t seed) {
  if (bag_size < 2) throw std::invalid_argument("make_bags: bag size must be >= 2");
  if (static_cast<Index>(rows.size()) < bag_size) {
    throw std::invalid_argument("make_bags: bag size " + std::to_string(bag_size) +
                                " exceeds split size " + std::to_string(rows.size()));
  }
  std::vector<Index> order(rows.begin(), rows.end());
  if (strategy == BagStrategy::Random) {
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
  } else {
    const auto& x = dataset.values();
    std::sort(order.begin(), order.end(), [&x](Index a, Index b) {
      for (Index j = 0; j < x.cols(); ++j) {
        if (x(a, j) < x(b, j)) return true;
        if (x(b, j) < x(a, j)) return false;
      }
      return a < b;
    });
  }

  const auto count = order.size() / static_cast<std::size_t>(bag_size);
  std::vector<Bag> bags;
  bags.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Bag bag;
    const auto begin = order.begin() + static_cast<std::ptrdiff_t>(k * static_cast<std::size_t>(bag_size));
    bag.members.assign(begin, begin + bag_size);
    bag.proportion = empirical_proportion(dataset, bag.members, dataset.num_classes());
    bags.push_back(std::move(bag));
  }
  return bags;
}

std::vector<BagPair> pair_bags(std::size_t num_bags, std::uint64_t seed) {
  if (num_bags < 2) throw std::invalid_argument("pair_bags: need at least 2 bags");
  std::vector<std::size_t> order(num_bags);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<BagPair> pairs;
  for (std::size_t k = 0; k + 1 < num_bags; k += 2) pairs.emplace_back(order[k], order[k + 1]);
  return pairs;
}

}  // namespace tabllp::data
