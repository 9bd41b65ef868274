// SPDX-License-Identifier: Apache-2.0
#include "tabllp/data/dataset.hpp"

#include <cmath>
#include <stdexcept>

namespace tabllp::data {

std::string to_string(ColumnKind kind) {
  return kind == ColumnKind::Numeric ? "numeric" : "categorical";
}

ColumnKind parse_column_kind(const std::string& text) {
  if (text == "numeric" || text == "num") return ColumnKind::Numeric;
  if (text == "categorical" || text == "cat") return ColumnKind::Categorical;
  throw std::invalid_argument("unknown column kind '" + text + "'");
}

void LabelProportion::validate() const {
  if (entries.size() == 0) throw std::invalid_argument("label proportion is empty");
  if ((entries.array() < 0.0).any()) {
    throw std::invalid_argument("label proportion has negative entries");
  }
  if (std::abs(entries.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("label proportion sums to " + std::to_string(entries.sum()));
  }
}

TabularDataset::TabularDataset(std::vector<ColumnSchema> schema, CellArray values,
                               MaskArray missing, std::vector<int> labels,
                               std::vector<std::string> class_names)
    : schema_(std::move(schema)),
      values_(std::move(values)),
      missing_(std::move(missing)),
      labels_(std::move(labels)),
      class_names_(std::move(class_names)) {
  if (static_cast<Index>(schema_.size()) != values_.cols()) {
    throw std::invalid_argument("dataset: schema has " + std::to_string(schema_.size()) +
                                " columns but rows have " + std::to_string(values_.cols()));
  }
  if (missing_.rows() != values_.rows() || missing_.cols() != values_.cols()) {
    throw std::invalid_argument("dataset: missing mask shape does not match values");
  }
  if (static_cast<Index>(labels_.size()) != values_.rows()) {
    throw std::invalid_argument("dataset: label count does not match row count");
  }
  for (int y : labels_) {
    if (y < 0 || y >= num_classes()) throw std::invalid_argument("dataset: label out of range");
  }
}

TabularDataset::TabularDataset(const TabularDataset& other)
    : schema_(other.schema_),
      values_(other.values_),
      missing_(other.missing_),
      labels_(other.labels_),
      class_names_(other.class_names_) {}

TabularDataset& TabularDataset::operator=(const TabularDataset& other) {
  if (this != &other) {
    schema_ = other.schema_;
    values_ = other.values_;
    missing_ = other.missing_;
    labels_ = other.labels_;
    class_names_ = other.class_names_;
    label_reads_.store(0);
  }
  return *this;
}

int TabularDataset::label(Index row) const {
  if (row < 0 || row >= rows()) throw std::out_of_range("label: row out of range");
  label_reads_.fetch_add(1, std::memory_order_relaxed);
  return labels_[static_cast<std::size_t>(row)];
}

Batch TabularDataset::gather(std::span<const Index> rows) const {
  Batch b;
  const auto n = static_cast<Index>(rows.size());
  b.values.resize(n, cols());
  b.missing.resize(n, cols());
  for (Index i = 0; i < n; ++i) {
    const Index r = rows[static_cast<std::size_t>(i)];
    if (r < 0 || r >= this->rows()) throw std::out_of_range("gather: row out of range");
    b.values.row(i) = values_.row(r);
    b.missing.row(i) = missing_.row(r);
  }
  return b;
}

TabularDataset TabularDataset::with_features(std::vector<ColumnSchema> schema, CellArray values,
                                             MaskArray missing) const {
  return TabularDataset(std::move(schema), std::move(values), std::move(missing), labels_,
                        class_names_);
}

}  // namespace tabllp::data
