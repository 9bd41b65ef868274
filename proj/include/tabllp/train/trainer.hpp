// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tabllp/bagops/aggregate.hpp"
#include "tabllp/losses/losses.hpp"
#include "tabllp/data/dataset.hpp"
#include "tabllp/metrics/metrics.hpp"
#include "tabllp/model/checkpoint.hpp"
#include "tabllp/model/encoder.hpp"
#include "tabllp/train/config.hpp"
#include "tabllp/train/metrics_log.hpp"

#include <cstdint>
#include <vector>

namespace tabllp::train {

using data::Index;
using model::ParamList;

/// Every trainable part of the pipeline. Phase 1 trains the encoder,
/// aggregator, view projectors and decoders; phase 2 trains the encoder and
/// the prediction head.
struct Model {
  Model() = default;
  Model(const std::vector<data::ColumnSchema>& schema, int num_classes, const TrainConfig& config);

  model::Encoder encoder;
  model::PredictionHead head;
  bagops::Aggregator aggregator;
  model::Mlp view1;  // g1
  model::Mlp view2;  // g2
  model::Decoders decoders;
  int num_classes = 0;

  ParamList pretrain_params() const;
  ParamList finetune_params() const;
  ParamList all_params() const;

  /// Frozen forward passes.
  diff::Matrix represent(const data::Batch& batch) const;
  diff::Matrix probabilities(const data::Batch& batch) const;
};

struct TrainData {
  const data::TabularDataset* dataset = nullptr;
  std::vector<data::Bag> train_bags;
  std::vector<data::Bag> validation_bags;
  /// Instance rows for fine-grained validation.
  std::vector<Index> validation_rows;
};

struct PhaseResult {
  int epochs_run = 0;
  int best_epoch = -1;
  double best_score = 0.0;
  bool stopped_early = false;
  model::Checkpoint checkpoint;
};

/// Ramp time of fine-tuning epoch `epoch` (0-based) out of `total`: the
/// first epoch maps to t = 0 and the last to t = T.
double ramp_time(int epoch, int total);

/// Pretraining objective of one bag pair. `batch` holds bag 1's m rows
/// followed by bag 2's; corruption draws from `noise`.
losses::PretrainTerms pretrain_pair_loss(const Model& model, const data::Batch& batch, Index m,
                                         const data::LabelProportion& p1, const data::LabelProportion& p2,
                                         const TrainConfig& config, model::Rng& noise);

struct PairSets {
  pairing::PairList positives;
  pairing::PairList negatives;
};

/// Fine-tuning objective of one bag pair at ramp time t. Pairs come from
/// similarity, n_pos and the configured assignment unless `fixed` is given;
/// the pairs used are written to `used`. The DLLP method returns the plain
/// LLP term with weights (0, 1).
losses::FinetuneTerms finetune_pair_loss(const Model& model, const data::Batch& batch1, const data::Batch& batch2,
                                         const data::LabelProportion& p1, const data::LabelProportion& p2,
                                         double t, const TrainConfig& config, const PairSets* fixed = nullptr,
                                         PairSets* used = nullptr);

/// Phase 1. Throws std::runtime_error with epoch, pair and loss components
/// when the loss becomes non-finite.
PhaseResult pretrain(Model& model, const TrainData& data, const TrainConfig& config, MetricsLog* log = nullptr);

/// Phase 2 (or the DLLP baseline when config.method is Dllp). Early stops on
/// the validation metric and leaves the best epoch's parameters in `model`.
PhaseResult finetune(Model& model, const TrainData& data, const TrainConfig& config, MetricsLog* log = nullptr);

/// Validation score used for early stopping; larger is better (coarse L1
/// is negated).
double validation_score(const Model& model, const TrainData& data, const TrainConfig& config);

enum class EvalMode { Fine, Coarse, Full };

struct EvalInputs {
  std::vector<Index> test_rows;
  std::vector<data::Bag> test_bags;
  std::vector<data::Bag> validation_bags;
};

/// Fine: "auc" (binary) or "accuracy". Coarse: "mpiou" and "l1" means over
/// test bags with per-bag rows. Always "cas" on test representations, and
/// "pair_accuracy" with its label-agreement "pair_base_rate" on validation
/// bag pairs when at least two validation bags exist.
metrics::MetricsReport evaluate(const Model& model, const data::TabularDataset& dataset, const EvalInputs& inputs,
                                EvalMode mode, Assignment assignment = Assignment::Lsa,
                                std::uint64_t pair_seed = 0x5eed);

/// Seed derivation shared by all stochastic stages.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

}  // namespace tabllp::train
