// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tabllp/model/encoder.hpp"

#include <optional>
#include <string>

namespace tabllp::bagops {

using diff::Tensor;
using model::ParamList;
using model::Rng;

enum class AggregatorVariant { WeightedSumCosine, QuerySoftmax };

std::string to_string(AggregatorVariant v);
AggregatorVariant parse_aggregator_variant(const std::string& text);

/// How the weighted-sum weights are normalised.
enum class WeightNorm { Softmax, Raw };

struct AggregatorConfig {
  AggregatorVariant variant = AggregatorVariant::WeightedSumCosine;
  WeightNorm weights = WeightNorm::Softmax;
  bool use_projection = true;
};

/// Bag aggregator: m x d instance rows -> 1 x d bag representation.
///
/// query-softmax: mean_rows(softmax(Z W Z^T) Z).
/// weighted-sum-cosine: w = softmax_i(sum_j cos(z_i, z_j)), b = w Z. With
/// WeightNorm::Raw the weights are (s_i + m) / sum_k (s_k + m), which keeps
/// them nonnegative since every s_i >= -m.
class Aggregator {
 public:
  Aggregator() = default;
  Aggregator(int d_rep, int projector_hidden, const AggregatorConfig& config, Rng& rng);

  /// Pooled representation before the optional projector.
  Tensor pool(const Tensor& z) const;
  /// pool followed by the projector when configured.
  Tensor operator()(const Tensor& z) const;

  const AggregatorConfig& config() const { return config_; }
  void collect(const std::string& prefix, ParamList& out) const;

  Tensor query;  // d x d, query-softmax only
  std::optional<model::Mlp> projector;

 private:
  AggregatorConfig config_;
};

}  // namespace tabllp::bagops
