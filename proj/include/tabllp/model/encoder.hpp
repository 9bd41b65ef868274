// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tabllp/data/dataset.hpp"
#include "tabllp/diff/gradcheck.hpp"
#include "tabllp/diff/ops.hpp"

#include <random>
#include <string>
#include <utility>
#include <vector>

namespace tabllp::model {

using diff::NamedTensor;
using diff::Tensor;
using Rng = std::mt19937_64;

/// Named-parameter list; order is stable and defines checkpoint layout.
using ParamList = std::vector<NamedTensor>;

struct EncoderConfig {
  int d_embed = 8;
  int hidden = 128;
  int hidden_layers = 2;
  int d_rep = 64;
  int d_cls = 16;
  int head_hidden = 32;
  int projector_hidden = 64;
  int decoder_hidden = 16;

  /// Throws std::invalid_argument unless 8 <= d_cls < d_rep and widths are positive.
  void validate() const;
};

/// Dense affine map x W + b, W initialised uniform in +-1/sqrt(fan_in).
class Linear {
 public:
  Linear() = default;
  Linear(int in, int out, Rng& rng);

  Tensor operator()(const Tensor& x) const;
  void collect(const std::string& prefix, ParamList& out) const;

  Tensor weight;
  Tensor bias;
};

/// Stack of Linear layers with relu between them (none after the last).
class Mlp {
 public:
  Mlp() = default;
  Mlp(const std::vector<int>& widths, Rng& rng);

  Tensor operator()(const Tensor& x) const;
  void collect(const std::string& prefix, ParamList& out) const;
  int in_width() const;
  int out_width() const;

  std::vector<Linear> layers;
};

/// Per-column embedding plus MLP trunk mapping a row to its representation z.
/// The first d_cls coordinates of z form the CLS-view, the rest the
/// feature-view.
class Encoder {
 public:
  Encoder() = default;
  Encoder(const std::vector<data::ColumnSchema>& schema, const EncoderConfig& config, Rng& rng);

  /// rows x (columns * d_embed). Missing categorical cells use the reserved
  /// table row; missing numeric cells use value 0 plus the column's
  /// missing-indicator vector.
  Tensor embed(const data::Batch& batch) const;
  Tensor trunk(const Tensor& embedded) const;
  Tensor encode(const data::Batch& batch) const { return trunk(embed(batch)); }

  const EncoderConfig& config() const { return config_; }
  const std::vector<data::ColumnSchema>& schema() const { return schema_; }
  int embedded_width() const { return static_cast<int>(schema_.size()) * config_.d_embed; }
  void collect(const std::string& prefix, ParamList& out) const;

  struct NumericEmbedding {
    Tensor weight;   // 1 x d_embed
    Tensor bias;     // 1 x d_embed
    Tensor missing;  // 1 x d_embed
  };
  std::vector<Tensor> tables;               // categorical: (cardinality + 1) x d_embed
  std::vector<NumericEmbedding> numerics;
  Mlp trunk_mlp;

 private:
  std::vector<data::ColumnSchema> schema_;
  EncoderConfig config_;
  std::vector<int> slot_;  // column -> index in tables or numerics
};

struct Views {
  Tensor cls;
  Tensor feature;
};

/// Column partition of Z into the CLS-view and feature-view.
Views views(const Tensor& z, int d_cls);

/// h: representation -> class logits.
class PredictionHead {
 public:
  PredictionHead() = default;
  PredictionHead(int d_rep, int hidden, int classes, Rng& rng);
  Tensor logits(const Tensor& z) const { return mlp(z); }
  /// Row-wise class probabilities.
  Tensor predict(const Tensor& z) const { return diff::softmax(logits(z)); }
  void collect(const std::string& prefix, ParamList& out) const { mlp.collect(prefix, out); }
  Mlp mlp;
};

/// Three-layer relu MLP projector.
Mlp make_projector(int in, int hidden, int out, Rng& rng);

/// One small MLP per input column, reading the feature-view: categorical
/// columns emit logits over their real levels, numeric columns a scalar.
class Decoders {
 public:
  Decoders() = default;
  Decoders(const std::vector<data::ColumnSchema>& schema, int in, int hidden, Rng& rng);
  std::vector<Tensor> reconstruct(const Tensor& feature_view) const;
  void collect(const std::string& prefix, ParamList& out) const;
  std::vector<Mlp> per_column;
};

struct CorruptionConfig {
  /// Per-cell probability of keeping the row's own cell.
  double p_cutmix = 0.7;
  /// MixUp blend weight on the row's own CutMix embedding.
  double mixup_nu = 0.7;
};

/// CutMix in cell space: row i keeps each cell with probability p_keep and
/// otherwise takes the cell (value and missing flag) of a partner row drawn
/// uniformly from the other rows. Categorical cells are swapped whole.
/// `partners` receives the partner of each row.
data::Batch cutmix(const data::Batch& batch, double p_keep, Rng& rng,
                   std::vector<Eigen::Index>* partners = nullptr);

/// e'_i = nu * E(x'_i) + (1 - nu) * E(x'_b) with x' the CutMix batch and b a
/// second uniformly drawn partner. Throws for batches smaller than 2.
Tensor corrupt(const Encoder& encoder, const data::Batch& batch, const CorruptionConfig& config,
               Rng& rng);

}  // namespace tabllp::model
