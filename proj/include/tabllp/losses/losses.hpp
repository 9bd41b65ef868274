// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tabllp/data/dataset.hpp"
#include "tabllp/diff/ops.hpp"
#include "tabllp/pairing/pairing.hpp"

#include <span>
#include <vector>

namespace tabllp::losses {

using diff::Tensor;
using data::LabelProportion;
using pairing::PairList;

struct LossConfig {
  double tau = 0.5;
  double margin = 0.0;
  double kappa = 1.0;
  double alpha = 1.0;
  double beta = 1.0;

  void validate() const;
};

/// A loss value that may be a conventional zero (e.g. no positive pairs).
struct FlaggedLoss {
  Tensor value;
  bool flagged = false;
};

/// Row-wise log-softmax built from primitives with a constant max shift.
Tensor log_softmax(const Tensor& logits);

/// Mean of instance probabilities over the bag (1 x C).
Tensor mean_prediction(const Tensor& probabilities);

/// KL(p_bar || p_hat) = sum_c p_bar_c log(p_bar_c / p_hat_c); p_hat clamped
/// at 1e-12 and 0 log 0 = 0.
Tensor llp_loss(const Tensor& p_hat, const LabelProportion& p_bar);

/// -(1/m) sum_i log p_hat_i[y_i]. Evaluation and oracle use only.
Tensor instance_ce(const Tensor& probabilities, std::span<const int> labels);

/// Symmetrised supervised InfoNCE over LSA positives: each pair is anchored
/// once from each bag against all m rows of the opposite bag (positive
/// included), and the two directions are averaged. Empty P gives 0 flagged.
FlaggedLoss diff_contrastive(const Tensor& z1, const Tensor& z2, const PairList& positives, double tau);

/// mean_P (1 - cos) + mean_Q max(0, cos - margin). Empty sets drop their term.
FlaggedLoss cosine_embedding(const Tensor& z1, const Tensor& z2, const PairList& positives,
                             const PairList& negatives, double margin);

/// -sum_i log softmax_k(u_i . u'_k / tau)[i] on unit-normalised rows.
Tensor self_contrastive(const Tensor& view, const Tensor& other_view, double tau);

/// kappa / n * sum over non-missing cells of cross-entropy (categorical) or
/// squared error (numeric).
Tensor reconstruction_loss(const std::vector<Tensor>& decoded, const data::Batch& original,
                           const std::vector<data::ColumnSchema>& schema, double kappa);

/// (1 - mPIoU) max(0, cos(b1, b2) - margin) + mPIoU (1 - cos(b1, b2)).
Tensor bag_contrastive(const Tensor& b1, const Tensor& b2, const LabelProportion& p1,
                       const LabelProportion& p2, double margin);

struct RampWeights {
  double lambda = 0.0;
  double gamma = 1.0;
};

/// lambda(t) = exp(-5 (1 - t/T)^2), gamma = 1 - lambda. Requires 0 <= t <= T, T >= 1.
RampWeights ramp_weights(double t, double total);

enum class ContrastiveObjective { InfoNce, CosineEmbedding };

/// Everything one fine-tuning step needs from a bag pair.
struct FinetuneInputs {
  Tensor z1, z2;          // representations, m x d_rep
  Tensor probs1, probs2;  // instance probabilities, m x C
  LabelProportion p1, p2;
  PairList positives;
  PairList negatives;  // used by the cosine-embedding objective
};

struct FinetuneTerms {
  Tensor total;
  Tensor contrastive;
  Tensor llp;
  RampWeights weights;
  bool empty_positives = false;
};

/// lambda(t) * contrastive + gamma(t) * (llp(bag1) + llp(bag2)) / 2.
FinetuneTerms finetune_loss(const FinetuneInputs& in, double t, double total_epochs,
                            const LossConfig& config,
                            ContrastiveObjective objective = ContrastiveObjective::InfoNce);

/// The DLLP baseline objective: (llp(bag1) + llp(bag2)) / 2.
Tensor dllp_loss(const Tensor& probs1, const Tensor& probs2, const LabelProportion& p1,
                 const LabelProportion& p2);

struct PretrainInputs {
  Tensor b1, b2;  // bag representations, 1 x d
  LabelProportion p1, p2;
  Tensor view, other_view;      // projected self-contrastive views, row aligned
  std::vector<Tensor> decoded;  // per-column reconstructions
  const data::Batch* original = nullptr;
  const std::vector<data::ColumnSchema>* schema = nullptr;
};

struct PretrainTerms {
  Tensor total;
  Tensor bag;
  Tensor self_contrastive;
  Tensor reconstruction;
};

/// alpha * bag_contrastive + beta * (self_contrastive + reconstruction).
/// Terms with zero weight are not built.
PretrainTerms pretrain_loss(const PretrainInputs& in, const LossConfig& config);

}  // namespace tabllp::losses
