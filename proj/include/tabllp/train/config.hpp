// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tabllp/bagops/aggregate.hpp"
#include "tabllp/losses/losses.hpp"
#include "tabllp/model/encoder.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace tabllp::train {

enum class ValidationMode { Fine, Coarse };
enum class CoarseMetric { Mpiou, L1 };
enum class Augmentation { MixupCutmix, Separated };
enum class Method { Bdc, Dllp };
enum class Assignment { Lsa, Greedy };

struct TrainConfig {
  int bag_size = 64;
  int pretrain_epochs = 50;
  int finetune_epochs = 300;
  int patience = 20;
  ValidationMode validation_mode = ValidationMode::Fine;
  CoarseMetric coarse_metric = CoarseMetric::Mpiou;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  Method method = Method::Bdc;
  /// Run phase 1 before fine-tuning.
  bool pretrain = true;
  Augmentation augmentation = Augmentation::MixupCutmix;
  Assignment assignment = Assignment::Lsa;
  losses::ContrastiveObjective objective = losses::ContrastiveObjective::InfoNce;
  losses::LossConfig loss;
  bagops::AggregatorConfig aggregator;
  model::EncoderConfig encoder;
  model::CorruptionConfig corruption;

  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
};

/// Flat key/value view of a config; keys are the config-file keys.
std::map<std::string, std::string> to_entries(const TrainConfig& config);

/// Sets one key from text. Throws std::invalid_argument for unknown keys or
/// unparsable values.
void apply_entry(TrainConfig& config, const std::string& key, const std::string& value);

bool is_train_key(const std::string& key);

/// FNV-1a 64 over "key=value\n" lines in key order.
std::uint64_t fingerprint(const std::map<std::string, std::string>& entries);

}  // namespace tabllp::train
