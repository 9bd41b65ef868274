// SPDX-License-Identifier: Apache-2.0
#include "tabllp/model/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace tabllp::model {

using diff::Matrix;
namespace ops = tabllp::diff;

namespace {

Tensor uniform_param(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return Tensor(std::move(m), true);
}

std::uniform_int_distribution<Eigen::Index> other_row(Eigen::Index n) {
  return std::uniform_int_distribution<Eigen::Index>(0, n - 2);
}

// Uniform over {0..n-1} \ {self}.
Eigen::Index draw_partner(Eigen::Index self, Eigen::Index n, Rng& rng) {
  auto dist = other_row(n);
  const Eigen::Index k = dist(rng);
  return k >= self ? k + 1 : k;
}

}  // namespace

void EncoderConfig::validate() const {
  if (d_embed < 1 || hidden < 1 || hidden_layers < 0 || head_hidden < 1 || projector_hidden < 1 ||
      decoder_hidden < 1) {
    throw std::invalid_argument("encoder: widths must be positive");
  }
  if (d_cls < 8 || d_cls >= d_rep) {
    throw std::invalid_argument("encoder: need 8 <= d_cls < d_rep, got d_cls=" + std::to_string(d_cls) +
                                " d_rep=" + std::to_string(d_rep));
  }
}

Linear::Linear(int in, int out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight = uniform_param(in, out, bound, rng);
  bias = uniform_param(1, out, bound, rng);
}

Tensor Linear::operator()(const Tensor& x) const { return ops::add(ops::matmul(x, weight), bias); }

void Linear::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

Mlp::Mlp(const std::vector<int>& widths, Rng& rng) {
  if (widths.size() < 2) throw std::invalid_argument("mlp: need at least input and output width");
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) layers.emplace_back(widths[k], widths[k + 1], rng);
}

Tensor Mlp::operator()(const Tensor& x) const {
  Tensor h = x;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    h = layers[k](h);
    if (k + 1 < layers.size()) h = ops::relu(h);
  }
  return h;
}

void Mlp::collect(const std::string& prefix, ParamList& out) const {
  for (std::size_t k = 0; k < layers.size(); ++k) layers[k].collect(prefix + "." + std::to_string(k), out);
}

int Mlp::in_width() const { return static_cast<int>(layers.front().weight.rows()); }
int Mlp::out_width() const { return static_cast<int>(layers.back().weight.cols()); }

Encoder::Encoder(const std::vector<data::ColumnSchema>& schema, const EncoderConfig& config, Rng& rng)
    : schema_(schema), config_(config) {
  config_.validate();
  for (const auto& col : schema_) {
    if (col.is_categorical()) {
      if (col.cardinality < 1) {
        throw std::invalid_argument("encoder: column '" + col.name + "' has no levels");
      }
      slot_.push_back(static_cast<int>(tables.size()));
      tables.push_back(uniform_param(col.cardinality + 1, config_.d_embed, 1.0, rng));
    } else {
      slot_.push_back(static_cast<int>(numerics.size()));
      NumericEmbedding e;
      e.weight = uniform_param(1, config_.d_embed, 1.0, rng);
      e.bias = uniform_param(1, config_.d_embed, 1.0, rng);
      e.missing = uniform_param(1, config_.d_embed, 1.0, rng);
      numerics.push_back(std::move(e));
    }
  }
  std::vector<int> widths{embedded_width()};
  for (int k = 0; k < config_.hidden_layers; ++k) widths.push_back(config_.hidden);
  widths.push_back(config_.d_rep);
  trunk_mlp = Mlp(widths, rng);
}

Tensor Encoder::embed(const data::Batch& batch) const {
  if (batch.cols() != static_cast<Eigen::Index>(schema_.size())) {
    throw std::invalid_argument("embed: batch has " + std::to_string(batch.cols()) +
                                " columns, schema has " + std::to_string(schema_.size()));
  }
  const Eigen::Index n = batch.rows();
  std::vector<Tensor> parts;
  parts.reserve(schema_.size());
  for (std::size_t j = 0; j < schema_.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    const auto& cs = schema_[j];
    if (cs.is_categorical()) {
      std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) {
        const double v = batch.missing(i, col) ? cs.cardinality : batch.values(i, col);
        const auto k = static_cast<Eigen::Index>(v);
        if (v < 0 || k > cs.cardinality || static_cast<double>(k) != v) {
          throw std::invalid_argument("embed: categorical index " + std::to_string(v) +
                                      " out of range for column '" + cs.name + "'");
        }
        idx[static_cast<std::size_t>(i)] = k;
      }
      parts.push_back(ops::gather_rows(tables[static_cast<std::size_t>(slot_[j])], idx));
    } else {
      const auto& e = numerics[static_cast<std::size_t>(slot_[j])];
      Matrix v(n, 1);
      Matrix m(n, 1);
      for (Eigen::Index i = 0; i < n; ++i) {
        const bool miss = batch.missing(i, col);
        v(i, 0) = miss ? 0.0 : batch.values(i, col);
        m(i, 0) = miss ? 1.0 : 0.0;
      }
      Tensor out = ops::add(ops::matmul(Tensor(std::move(v)), e.weight), e.bias);
      if ((m.array() != 0.0).any()) out = ops::add(out, ops::matmul(Tensor(std::move(m)), e.missing));
      parts.push_back(out);
    }
  }
  return ops::concat(std::span<const Tensor>(parts), ops::Axis::Cols);
}

Tensor Encoder::trunk(const Tensor& embedded) const { return trunk_mlp(embedded); }

void Encoder::collect(const std::string& prefix, ParamList& out) const {
  for (std::size_t j = 0; j < schema_.size(); ++j) {
    const std::string name = prefix + ".embed." + schema_[j].name;
    if (schema_[j].is_categorical()) {
      out.push_back({name + ".table", tables[static_cast<std::size_t>(slot_[j])]});
    } else {
      const auto& e = numerics[static_cast<std::size_t>(slot_[j])];
      out.push_back({name + ".weight", e.weight});
      out.push_back({name + ".bias", e.bias});
      out.push_back({name + ".missing", e.missing});
    }
  }
  trunk_mlp.collect(prefix + ".trunk", out);
}

Views views(const Tensor& z, int d_cls) {
  if (d_cls <= 0 || d_cls >= z.cols()) {
    throw std::invalid_argument("views: d_cls " + std::to_string(d_cls) + " invalid for width " +
                                std::to_string(z.cols()));
  }
  return {ops::slice_cols(z, 0, d_cls), ops::slice_cols(z, d_cls, z.cols() - d_cls)};
}

PredictionHead::PredictionHead(int d_rep, int hidden, int classes, Rng& rng)
    : mlp({d_rep, hidden, classes}, rng) {}

Mlp make_projector(int in, int hidden, int out, Rng& rng) { return Mlp({in, hidden, hidden, out}, rng); }

Decoders::Decoders(const std::vector<data::ColumnSchema>& schema, int in, int hidden, Rng& rng) {
  for (const auto& col : schema) {
    const int out = col.is_categorical() ? col.cardinality : 1;
    per_column.emplace_back(std::vector<int>{in, hidden, out}, rng);
  }
}

std::vector<Tensor> Decoders::reconstruct(const Tensor& feature_view) const {
  std::vector<Tensor> out;
  out.reserve(per_column.size());
  for (const auto& mlp : per_column) out.push_back(mlp(feature_view));
  return out;
}

void Decoders::collect(const std::string& prefix, ParamList& out) const {
  for (std::size_t j = 0; j < per_column.size(); ++j) per_column[j].collect(prefix + "." + std::to_string(j), out);
}

data::Batch cutmix(const data::Batch& batch, double p_keep, Rng& rng, std::vector<Eigen::Index>* partners) {
  const Eigen::Index n = batch.rows();
  if (n < 2) throw std::invalid_argument("corrupt: batch needs at least 2 rows for a partner");
  if (!(p_keep > 0.0 && p_keep <= 1.0)) throw std::invalid_argument("corrupt: p_cutmix must be in (0, 1]");
  data::Batch out = batch;
  std::bernoulli_distribution keep(p_keep);
  if (partners) partners->assign(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index a = draw_partner(i, n, rng);
    if (partners) (*partners)[static_cast<std::size_t>(i)] = a;
    for (Eigen::Index j = 0; j < batch.cols(); ++j) {
      if (!keep(rng)) {
        out.values(i, j) = batch.values(a, j);
        out.missing(i, j) = batch.missing(a, j);
      }
    }
  }
  return out;
}

Tensor corrupt(const Encoder& encoder, const data::Batch& batch, const CorruptionConfig& config, Rng& rng) {
  if (!(config.mixup_nu > 0.0 && config.mixup_nu <= 1.0)) {
    throw std::invalid_argument("corrupt: mixup_nu must be in (0, 1]");
  }
  const data::Batch mixed = cutmix(batch, config.p_cutmix, rng);
  const Eigen::Index n = batch.rows();
  std::vector<Eigen::Index> blend(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) blend[static_cast<std::size_t>(i)] = draw_partner(i, n, rng);
  const Tensor e = encoder.embed(mixed);
  if (config.mixup_nu == 1.0) return e;
  return ops::add(ops::scale(e, config.mixup_nu), ops::scale(ops::gather_rows(e, blend), 1.0 - config.mixup_nu));
}

}  // namespace tabllp::model
