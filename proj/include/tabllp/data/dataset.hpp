// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tabllp::data {

using Index = Eigen::Index;
using CellArray = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic>;
using MaskArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

enum class ColumnKind { Numeric, Categorical };

std::string to_string(ColumnKind kind);
ColumnKind parse_column_kind(const std::string& text);

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  /// Categorical only: number of real levels. Index `cardinality` is the
  /// reserved missing/unseen level.
  int cardinality = 0;
  std::vector<std::string> levels;
  /// Numeric only, fit on the training split. std is the divisor actually
  /// used (1 for constant columns).
  double mean = 0.0;
  double std = 1.0;
  bool standardized = false;

  bool is_categorical() const { return kind == ColumnKind::Categorical; }
};

/// A class-proportion vector; entries are nonnegative and sum to 1.
struct LabelProportion {
  Eigen::RowVectorXd entries;

  Index classes() const { return entries.size(); }
  double operator[](Index c) const { return entries(c); }
  /// Throws std::invalid_argument when entries are negative or do not sum
  /// to 1 within 1e-9.
  void validate() const;
};

/// Gathered rows of a dataset, in member order.
struct Batch {
  CellArray values;
  MaskArray missing;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
};

/// Feature matrix with per-cell missing flags and held-out instance labels.
/// Every label read goes through `label()` and is counted, so training
/// code paths can be audited for label leakage.
class TabularDataset {
 public:
  TabularDataset() = default;
  TabularDataset(std::vector<ColumnSchema> schema, CellArray values, MaskArray missing,
                 std::vector<int> labels, std::vector<std::string> class_names);
  TabularDataset(const TabularDataset& other);
  TabularDataset& operator=(const TabularDataset& other);

  const std::vector<ColumnSchema>& schema() const { return schema_; }
  const CellArray& values() const { return values_; }
  const MaskArray& missing() const { return missing_; }
  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }
  int num_classes() const { return static_cast<int>(class_names_.size()); }
  const std::vector<std::string>& class_names() const { return class_names_; }

  int label(Index row) const;
  std::size_t label_reads() const { return label_reads_.load(); }
  void reset_label_reads() const { label_reads_.store(0); }
  /// Unaudited access for serialisation only.
  const std::vector<int>& labels_for_export() const { return labels_; }

  Batch gather(std::span<const Index> rows) const;

  /// Same labels and classes over replacement features; not a label read.
  TabularDataset with_features(std::vector<ColumnSchema> schema, CellArray values,
                               MaskArray missing) const;

 private:
  std::vector<ColumnSchema> schema_;
  CellArray values_;
  MaskArray missing_;
  std::vector<int> labels_;
  std::vector<std::string> class_names_;
  mutable std::atomic<std::size_t> label_reads_{0};
};

struct Bag {
  std::vector<Index> members;
  LabelProportion proportion;

  Index size() const { return static_cast<Index>(members.size()); }
};

}  // namespace tabllp::data
