// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tabllp/data/bagging.hpp"
#include "tabllp/train/config.hpp"
#include "tabllp/train/trainer.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace tabllp::cli {

/// Flat `key = value` experiment file: every TrainConfig key plus data
/// paths, schema declaration and output locations. Unknown keys are
/// rejected.
struct ExperimentConfig {
  train::TrainConfig train;
  std::string input_csv;
  std::string columns;  // "name:kind,..."
  std::string label;
  std::string dataset;  // prepared dataset; default <output_dir>/dataset.json
  std::string bags;     // bag file; default <output_dir>/bags.jsonl
  std::string checkpoint;
  std::string output_dir = "out";
  std::array<double, 3> split{0.8, 0.1, 0.1};
  data::BagStrategy bag_strategy = data::BagStrategy::Random;
  train::EvalMode eval_mode = train::EvalMode::Full;
  /// Seed sweep for pretrain/finetune/evaluate/report; empty means the
  /// single `seed`.
  std::vector<std::uint64_t> seeds;

  static ExperimentConfig from_file(const std::filesystem::path& path);
  static ExperimentConfig parse(std::istream& in, const std::string& source);

  /// Applies one key; throws std::invalid_argument for unknown keys.
  void set(const std::string& key, const std::string& value);
  /// Applies "key=value".
  void set_override(const std::string& assignment);

  std::map<std::string, std::string> entries() const;
  /// Hash of the entries minus file locations, so the same experiment run
  /// into two directories carries the same fingerprint.
  std::uint64_t fingerprint() const;

  std::filesystem::path dataset_file() const;
  std::filesystem::path bags_file() const;
  std::vector<std::uint64_t> seed_list() const;
  /// Output directory of one seed's run: output_dir itself for a single
  /// seed, output_dir/seed_<s> for sweeps.
  std::filesystem::path run_dir(std::uint64_t seed) const;
  /// Copy with `seed` set, for one member of a sweep.
  ExperimentConfig for_seed(std::uint64_t seed) const;
};

}  // namespace tabllp::cli
