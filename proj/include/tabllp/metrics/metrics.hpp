// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace tabllp::metrics {

using Eigen::Index;

/// Mann-Whitney AUC: P(s+ > s-) + P(s+ = s-)/2, exact via tied ranks.
/// Throws std::invalid_argument when only one class is present.
double auc(std::span<const double> scores, std::span<const int> labels);

double accuracy(std::span<const int> predicted, std::span<const int> labels);

template <typename D1, typename D2>
double l1_bag(const Eigen::MatrixBase<D1>& predicted, const Eigen::MatrixBase<D2>& truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("l1_bag: length mismatch");
  return (predicted - truth).cwiseAbs().sum();
}

/// Mean over classes with nonzero union of min/max. Throws when every class
/// has zero union.
template <typename D1, typename D2>
double mpiou(const Eigen::MatrixBase<D1>& predicted, const Eigen::MatrixBase<D2>& truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("mpiou: length mismatch");
  double total = 0.0;
  Index classes = 0;
  for (Index c = 0; c < predicted.size(); ++c) {
    const double hi = std::max(predicted(c), truth(c));
    if (hi <= 0.0) continue;
    total += std::min(predicted(c), truth(c)) / hi;
    ++classes;
  }
  if (classes == 0) throw std::invalid_argument("mpiou: all classes have zero union");
  return total / static_cast<double>(classes);
}

struct CasResult {
  double score = 0.5;
  double intra = 0.0;  // mean raw cosine over same-class pairs
  double inter = 0.0;  // mean raw cosine over cross-class pairs
  bool degenerate = false;
};

/// Class Awareness Score: intra~ / (intra~ + inter~) with x~ = (x + 1) / 2
/// over unordered row pairs. A zero denominator returns 0.5 flagged.
CasResult cas(const Eigen::MatrixXd& representations, std::span<const int> labels);

/// Named scalar metrics plus optional per-bag rows.
struct MetricsReport {
  std::map<std::string, double> values;
  struct BagRow {
    Index bag = 0;
    double mpiou = 0.0;
    double l1 = 0.0;
  };
  std::vector<BagRow> bags;
  std::map<std::string, std::string> info;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  double at(const std::string& key) const { return values.at(key); }
};

/// Human-readable two-column table.
void write_table(std::ostream& out, const MetricsReport& report);
/// One JSON object per line: {"metric": ..., "value": ...} followed by
/// per-bag rows {"bag": k, "mpiou": ..., "l1": ...}.
void write_records(std::ostream& out, const MetricsReport& report);

}  // namespace tabllp::metrics
