// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tabllp/data/dataset.hpp"
#include "tabllp/data/preprocess.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace tabllp::data {

/// A preprocessed dataset together with its split.
struct PreparedData {
  TabularDataset dataset;
  SplitIndices split;
  std::uint64_t fingerprint = 0;
};

/// JSON document holding schema, cells, missing flags, labels, classes and
/// split indices. Doubles are written in shortest round-trip form.
void write_prepared(const std::filesystem::path& path, const PreparedData& data);
PreparedData read_prepared(const std::filesystem::path& path);

/// Bags grouped by split name ("train", "validation", "test").
using BagSets = std::map<std::string, std::vector<Bag>>;

/// Line-delimited records. The first line is {"fingerprint": ...}; each
/// following line is {"bag_id", "split", "members", "proportion"}.
void write_bags(const std::filesystem::path& path, const BagSets& bags, std::uint64_t fingerprint);
BagSets read_bags(const std::filesystem::path& path, std::uint64_t* fingerprint = nullptr);

/// Column kinds, cardinalities and missing counts, one column per line.
void write_schema_report(std::ostream& out, const TabularDataset& dataset);

}  // namespace tabllp::data
