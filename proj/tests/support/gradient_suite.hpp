// SPDX-License-Identifier: Apache-2.0
// Randomised finite-difference checks for every loss and trainable module.
#pragma once

#include "tabllp/data/dataset.hpp"
#include "tabllp/train/config.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace tabllp::testing {

/// Preprocessed-looking toy data: two numeric columns and one categorical
/// column with 3 levels, about 15% missing cells, two classes.
data::TabularDataset toy_dataset(data::Index rows, std::mt19937_64& rng);

/// Small widths so finite differences stay cheap.
train::TrainConfig toy_config();

struct GradFamily {
  std::string name;
  /// One random configuration. nullopt when the draw lands within the kink
  /// margin of a relu and is rejected; otherwise the max relative error.
  std::function<std::optional<double>(std::uint64_t seed)> run;
};

const std::vector<GradFamily>& gradient_families();

struct FamilyResult {
  std::string name;
  int accepted = 0;
  int attempted = 0;
  double max_rel_error = 0.0;
};

/// Runs a family over seeds until `configs` configurations are accepted
/// (giving up after 20x that many attempts).
FamilyResult run_family(const GradFamily& family, int configs, std::uint64_t base_seed = 0);

}  // namespace tabllp::testing
