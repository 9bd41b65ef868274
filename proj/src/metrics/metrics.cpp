// SPDX-License-Identifier: Apache-2.0
#include "tabllp/metrics/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <stdexcept>

namespace tabllp::metrics {

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc: length mismatch");
  const auto n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of positive ranks with average ranks over ties; ranks are doubled
  // so tied groups stay integral.
  long long rank2_pos = 0;
  long long n_pos = 0;
  std::size_t k = 0;
  while (k < n) {
    std::size_t e = k;
    while (e + 1 < n && scores[order[e + 1]] == scores[order[k]]) ++e;
    const long long doubled = static_cast<long long>(k + 1 + e + 1);  // 2 * average rank
    for (std::size_t t = k; t <= e; ++t) {
      if (labels[order[t]] == 1) {
        rank2_pos += doubled;
        ++n_pos;
      } else if (labels[order[t]] != 0) {
        throw std::invalid_argument("auc: labels must be 0 or 1");
      }
    }
    k = e + 1;
  }
  const long long n_neg = static_cast<long long>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("AUC undefined: only one class present");
  // U = R+ - n+(n+ + 1)/2, in doubled units.
  const long long u2 = rank2_pos - n_pos * (n_pos + 1);
  return static_cast<double>(u2) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double accuracy(std::span<const int> predicted, std::span<const int> labels) {
  if (predicted.empty()) throw std::invalid_argument("accuracy: empty input");
  if (predicted.size() != labels.size()) throw std::invalid_argument("accuracy: length mismatch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

CasResult cas(const Eigen::MatrixXd& representations, std::span<const int> labels) {
  const Index n = representations.rows();
  if (static_cast<std::size_t>(n) != labels.size()) throw std::invalid_argument("cas: length mismatch");
  std::vector<int> distinct(labels.begin(), labels.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 2) throw std::invalid_argument("cas: need at least two classes");

  Eigen::MatrixXd unit = representations;
  for (Index r = 0; r < n; ++r) {
    const double norm = unit.row(r).norm();
    if (norm < 1e-12) {
      unit.row(r).setZero();
    } else {
      unit.row(r) /= norm;
    }
  }
  const Eigen::MatrixXd sim = unit * unit.transpose();
  double intra = 0.0, inter = 0.0;
  long long n_intra = 0, n_inter = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) {
        intra += sim(i, j);
        ++n_intra;
      } else {
        inter += sim(i, j);
        ++n_inter;
      }
    }
  }
  CasResult r;
  r.intra = n_intra ? intra / static_cast<double>(n_intra) : 0.0;
  r.inter = inter / static_cast<double>(n_inter);
  // Classes of size one contribute no intra pairs; fall back to the
  // degenerate value rather than inventing one.
  if (n_intra == 0) {
    r.degenerate = true;
    return r;
  }
  const double a = (r.intra + 1.0) / 2.0;
  const double b = (r.inter + 1.0) / 2.0;
  if (a + b <= 0.0) {
    r.degenerate = true;
    r.score = 0.5;
  } else {
    r.score = a / (a + b);
  }
  return r;
}

void write_table(std::ostream& out, const MetricsReport& report) {
  std::size_t width = 6;
  for (const auto& [k, v] : report.values) width = std::max(width, k.size());
  const auto old_flags = out.flags();
  const auto old_prec = out.precision();
  out << std::left << std::setw(static_cast<int>(width)) << "metric" << "  value\n";
  out << std::string(width, '-') << "  " << std::string(10, '-') << "\n";
  out << std::fixed << std::setprecision(6);
  for (const auto& [k, v] : report.values) out << std::setw(static_cast<int>(width)) << k << "  " << v << "\n";
  for (const auto& [k, v] : report.info) out << std::setw(static_cast<int>(width)) << k << "  " << v << "\n";
  out.flags(old_flags);
  out.precision(old_prec);
}

void write_records(std::ostream& out, const MetricsReport& report) {
  for (const auto& [k, v] : report.info) out << nlohmann::json{{"info", k}, {"value", v}}.dump() << "\n";
  for (const auto& [k, v] : report.values) out << nlohmann::json{{"metric", k}, {"value", v}}.dump() << "\n";
  for (const auto& row : report.bags) {
    out << nlohmann::json{{"bag", row.bag}, {"mpiou", row.mpiou}, {"l1", row.l1}}.dump() << "\n";
  }
}

}  // namespace tabllp::metrics
