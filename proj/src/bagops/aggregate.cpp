// SPDX-License-Identifier: Apache-2.0
#include "tabllp/bagops/aggregate.hpp"

#include <cmath>
#include <stdexcept>

namespace tabllp::bagops {

using diff::Axis;
namespace ops = tabllp::diff;

std::string to_string(AggregatorVariant v) {
  return v == AggregatorVariant::QuerySoftmax ? "query-softmax" : "weighted-sum-cosine";
}

AggregatorVariant parse_aggregator_variant(const std::string& text) {
  if (text == "weighted-sum-cosine" || text == "ws") return AggregatorVariant::WeightedSumCosine;
  if (text == "query-softmax" || text == "ia") return AggregatorVariant::QuerySoftmax;
  throw std::invalid_argument("unknown aggregator variant '" + text + "'");
}

Aggregator::Aggregator(int d_rep, int projector_hidden, const AggregatorConfig& config, Rng& rng)
    : config_(config) {
  if (d_rep < 1) throw std::invalid_argument("aggregator: d_rep must be positive");
  if (config.variant == AggregatorVariant::QuerySoftmax) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(d_rep));
    std::uniform_real_distribution<double> u(-bound, bound);
    diff::Matrix w(d_rep, d_rep);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = u(rng);
    query = Tensor(std::move(w), true);
  }
  if (config.use_projection) projector = model::make_projector(d_rep, projector_hidden, d_rep, rng);
}

Tensor Aggregator::pool(const Tensor& z) const {
  if (z.rows() < 1) throw std::invalid_argument("aggregate: empty bag");
  const double m = static_cast<double>(z.rows());
  if (config_.variant == AggregatorVariant::QuerySoftmax) {
    if (query.rows() != z.cols()) {
      throw std::invalid_argument("aggregate: W is " + query.shape_string() + " but Z is " + z.shape_string());
    }
    const Tensor scores = ops::matmul(ops::matmul(z, query), ops::transpose(z));
    return ops::mean(ops::matmul(ops::softmax(scores), z), Axis::Rows);
  }
  // Row sums of the cosine matrix, as a 1 x m row.
  const Tensor s = ops::transpose(ops::sum(ops::cosine_similarity(z, z), Axis::Cols));
  Tensor w;
  if (config_.weights == WeightNorm::Softmax) {
    w = ops::softmax(s);
  } else {
    const Tensor shifted = ops::add_scalar(s, m);
    w = ops::div(shifted, ops::sum(shifted));
  }
  return ops::matmul(w, z);
}

Tensor Aggregator::operator()(const Tensor& z) const {
  Tensor b = pool(z);
  if (projector) b = (*projector)(b);
  return b;
}

void Aggregator::collect(const std::string& prefix, ParamList& out) const {
  if (config_.variant == AggregatorVariant::QuerySoftmax) out.push_back({prefix + ".W", query});
  if (projector) projector->collect(prefix + ".proj", out);
}

}  // namespace tabllp::bagops
