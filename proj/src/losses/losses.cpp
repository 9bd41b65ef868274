// SPDX-License-Identifier: Apache-2.0
#include "tabllp/losses/losses.hpp"

#include "tabllp/metrics/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace tabllp::losses {

using diff::Axis;
using diff::Matrix;
namespace ops = tabllp::diff;

namespace {

Tensor constant(Matrix m) { return Tensor(std::move(m), false); }

Tensor row_constant(const Eigen::RowVectorXd& v) { return constant(Matrix(v)); }

// 0/1 matrix with ones at the listed pairs.
Matrix pair_mask(Eigen::Index rows, Eigen::Index cols, const PairList& pairs, bool transposed) {
  Matrix mask = Matrix::Zero(rows, cols);
  for (const auto& [i, j] : pairs) {
    if (transposed) {
      mask(j, i) = 1.0;
    } else {
      mask(i, j) = 1.0;
    }
  }
  return mask;
}

}  // namespace

void LossConfig::validate() const {
  if (!(tau > 0.0)) throw std::invalid_argument("loss config: tau must be > 0");
  if (!(margin >= 0.0 && margin < 1.0)) throw std::invalid_argument("loss config: margin must be in [0, 1)");
  if (kappa < 0.0 || alpha < 0.0 || beta < 0.0) {
    throw std::invalid_argument("loss config: kappa, alpha, beta must be >= 0");
  }
}

Tensor log_softmax(const Tensor& logits) {
  Matrix shift = logits.value().rowwise().maxCoeff();
  const Tensor c = constant(shift);
  const Tensor centred = ops::sub(logits, c);
  const Tensor lse = ops::log(ops::sum(ops::exp(centred), Axis::Cols));
  return ops::sub(centred, lse);
}

Tensor mean_prediction(const Tensor& probabilities) { return ops::mean(probabilities, Axis::Rows); }

Tensor llp_loss(const Tensor& p_hat, const LabelProportion& p_bar) {
  if (p_hat.rows() != 1 || p_hat.cols() != p_bar.classes()) {
    throw std::invalid_argument("llp_loss: length mismatch, predicted " + p_hat.shape_string() + " vs " +
                                std::to_string(p_bar.classes()) + " classes");
  }
  // sum_c p_bar (log p_bar - log p_hat); zero entries of p_bar vanish.
  Eigen::RowVectorXd log_bar = p_bar.entries.unaryExpr([](double v) { return v > 0.0 ? std::log(v) : 0.0; });
  const Tensor weights = row_constant(p_bar.entries);
  const Tensor diff = ops::sub(row_constant(log_bar), ops::log(p_hat));
  return ops::sum(ops::mul(diff, weights));
}

Tensor instance_ce(const Tensor& probabilities, std::span<const int> labels) {
  if (static_cast<std::size_t>(probabilities.rows()) != labels.size()) {
    throw std::invalid_argument("instance_ce: label count mismatch");
  }
  Matrix onehot = Matrix::Zero(probabilities.rows(), probabilities.cols());
  for (std::size_t i = 0; i < labels.size(); ++i) onehot(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  const Tensor picked = ops::mul(ops::log(probabilities), constant(std::move(onehot)));
  return ops::scale(ops::sum(picked), -1.0 / static_cast<double>(labels.size()));
}

FlaggedLoss diff_contrastive(const Tensor& z1, const Tensor& z2, const PairList& positives, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("diff_contrastive: tau must be > 0");
  if (positives.empty()) return {Tensor::scalar(0.0), true};
  const double count = static_cast<double>(positives.size());
  const Tensor logits = ops::scale(ops::cosine_similarity(z1, z2), 1.0 / tau);
  const Tensor from_first = log_softmax(logits);
  const Tensor from_second = log_softmax(ops::transpose(logits));
  const Tensor term1 = ops::sum(ops::mul(from_first, constant(pair_mask(z1.rows(), z2.rows(), positives, false))));
  const Tensor term2 = ops::sum(ops::mul(from_second, constant(pair_mask(z2.rows(), z1.rows(), positives, true))));
  return {ops::scale(ops::add(term1, term2), -0.5 / count), false};
}

FlaggedLoss cosine_embedding(const Tensor& z1, const Tensor& z2, const PairList& positives,
                             const PairList& negatives, double margin) {
  if (positives.empty() && negatives.empty()) return {Tensor::scalar(0.0), true};
  const Tensor cos = ops::cosine_similarity(z1, z2);
  Tensor total = Tensor::scalar(0.0);
  if (!positives.empty()) {
    const Tensor pulled = ops::mul(ops::add_scalar(ops::neg(cos), 1.0),
                                   constant(pair_mask(z1.rows(), z2.rows(), positives, false)));
    total = ops::add(total, ops::scale(ops::sum(pulled), 1.0 / static_cast<double>(positives.size())));
  }
  if (!negatives.empty()) {
    const Tensor pushed = ops::mul(ops::relu(ops::add_scalar(cos, -margin)),
                                   constant(pair_mask(z1.rows(), z2.rows(), negatives, false)));
    total = ops::add(total, ops::scale(ops::sum(pushed), 1.0 / static_cast<double>(negatives.size())));
  }
  return {total, positives.empty()};
}

Tensor self_contrastive(const Tensor& view, const Tensor& other_view, double tau) {
  if (view.rows() != other_view.rows()) {
    throw std::invalid_argument("self_contrastive: row-count mismatch " + view.shape_string() + " vs " +
                                other_view.shape_string());
  }
  if (!(tau > 0.0)) throw std::invalid_argument("self_contrastive: tau must be > 0");
  const Tensor logits = ops::scale(
      ops::matmul(ops::normalize_rows(view), ops::transpose(ops::normalize_rows(other_view))), 1.0 / tau);
  const Matrix eye = Matrix::Identity(view.rows(), view.rows());
  return ops::neg(ops::sum(ops::mul(log_softmax(logits), constant(eye))));
}

Tensor reconstruction_loss(const std::vector<Tensor>& decoded, const data::Batch& original,
                           const std::vector<data::ColumnSchema>& schema, double kappa) {
  if (decoded.size() != schema.size() || original.cols() != static_cast<Eigen::Index>(schema.size())) {
    throw std::invalid_argument("reconstruction_loss: decoders not aligned with schema");
  }
  const Eigen::Index n = original.rows();
  if (kappa == 0.0 || n == 0) return Tensor::scalar(0.0);
  Tensor total = Tensor::scalar(0.0);
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    const Tensor& pred = decoded[j];
    if (pred.rows() != n) throw std::invalid_argument("reconstruction_loss: decoder row mismatch");
    if (schema[j].is_categorical()) {
      Matrix target = Matrix::Zero(n, pred.cols());
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!original.missing(i, col)) target(i, static_cast<Eigen::Index>(original.values(i, col))) = 1.0;
      }
      total = ops::sub(total, ops::sum(ops::mul(log_softmax(pred), constant(std::move(target)))));
    } else {
      Matrix target(n, 1), keep(n, 1);
      for (Eigen::Index i = 0; i < n; ++i) {
        const bool miss = original.missing(i, col);
        target(i, 0) = miss ? 0.0 : original.values(i, col);
        keep(i, 0) = miss ? 0.0 : 1.0;
      }
      const Tensor err = ops::mul(ops::sub(pred, constant(std::move(target))), constant(std::move(keep)));
      total = ops::add(total, ops::sum(ops::mul(err, err)));
    }
  }
  return ops::scale(total, kappa / static_cast<double>(n));
}

Tensor bag_contrastive(const Tensor& b1, const Tensor& b2, const LabelProportion& p1,
                       const LabelProportion& p2, double margin) {
  const double overlap = metrics::mpiou(p1.entries, p2.entries);
  const Tensor cos = ops::cosine_similarity(b1, b2);
  const Tensor apart = ops::scale(ops::relu(ops::add_scalar(cos, -margin)), 1.0 - overlap);
  const Tensor together = ops::scale(ops::add_scalar(ops::neg(cos), 1.0), overlap);
  return ops::add(apart, together);
}

RampWeights ramp_weights(double t, double total) {
  if (!(total >= 1.0)) throw std::invalid_argument("ramp_weights: total epochs must be >= 1");
  if (t < 0.0 || t > total) {
    throw std::invalid_argument("ramp_weights: epoch " + std::to_string(t) + " outside [0, " +
                                std::to_string(total) + "]");
  }
  const double r = 1.0 - t / total;
  RampWeights w;
  w.lambda = std::exp(-5.0 * r * r);
  w.gamma = 1.0 - w.lambda;
  return w;
}

Tensor dllp_loss(const Tensor& probs1, const Tensor& probs2, const LabelProportion& p1,
                 const LabelProportion& p2) {
  return ops::scale(ops::add(llp_loss(mean_prediction(probs1), p1), llp_loss(mean_prediction(probs2), p2)), 0.5);
}

FinetuneTerms finetune_loss(const FinetuneInputs& in, double t, double total_epochs, const LossConfig& config,
                            ContrastiveObjective objective) {
  FinetuneTerms out;
  out.weights = ramp_weights(t, total_epochs);
  FlaggedLoss c = objective == ContrastiveObjective::InfoNce
                      ? diff_contrastive(in.z1, in.z2, in.positives, config.tau)
                      : cosine_embedding(in.z1, in.z2, in.positives, in.negatives, config.margin);
  out.contrastive = c.value;
  out.empty_positives = in.positives.empty();
  out.llp = dllp_loss(in.probs1, in.probs2, in.p1, in.p2);
  out.total = ops::add(ops::scale(out.contrastive, out.weights.lambda), ops::scale(out.llp, out.weights.gamma));
  return out;
}

PretrainTerms pretrain_loss(const PretrainInputs& in, const LossConfig& config) {
  PretrainTerms out;
  out.bag = Tensor::scalar(0.0);
  out.self_contrastive = Tensor::scalar(0.0);
  out.reconstruction = Tensor::scalar(0.0);
  Tensor total = Tensor::scalar(0.0);
  if (config.alpha != 0.0) {
    out.bag = bag_contrastive(in.b1, in.b2, in.p1, in.p2, config.margin);
    total = ops::add(total, ops::scale(out.bag, config.alpha));
  }
  if (config.beta != 0.0) {
    out.self_contrastive = self_contrastive(in.view, in.other_view, config.tau);
    if (in.original && in.schema && !in.decoded.empty()) {
      out.reconstruction = reconstruction_loss(in.decoded, *in.original, *in.schema, config.kappa);
    }
    total = ops::add(total, ops::scale(ops::add(out.self_contrastive, out.reconstruction), config.beta));
  }
  out.total = total;
  return out;
}

}  // namespace tabllp::losses
