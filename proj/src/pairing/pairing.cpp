// SPDX-License-Identifier: Apache-2.0
#include "tabllp/pairing/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>

namespace tabllp::pairing {

Index n_pos(const data::LabelProportion& p1, const data::LabelProportion& p2, Index m) {
  if (p1.classes() != p2.classes()) throw std::invalid_argument("n_pos: proportion lengths differ");
  const double overlap = p1.entries.cwiseMin(p2.entries).sum();
  const auto rounded = static_cast<Index>(std::floor(static_cast<double>(m) * overlap + 0.5));
  return std::clamp<Index>(rounded, 0, m);
}

PairList select_positives(const Matrix& s, const Permutation& mapping, Index n_pos) {
  const auto m = static_cast<Index>(mapping.size());
  if (n_pos < 0 || n_pos > m) throw std::invalid_argument("select_positives: n_pos out of [0, m]");
  std::vector<Index> rows(mapping.size());
  std::iota(rows.begin(), rows.end(), Index{0});
  std::stable_sort(rows.begin(), rows.end(), [&](Index a, Index b) {
    return s(a, mapping[static_cast<std::size_t>(a)]) > s(b, mapping[static_cast<std::size_t>(b)]);
  });
  rows.resize(static_cast<std::size_t>(n_pos));
  std::sort(rows.begin(), rows.end());
  PairList out;
  out.reserve(rows.size());
  for (Index i : rows) out.emplace_back(i, mapping[static_cast<std::size_t>(i)]);
  return out;
}

PairList remaining_pairs(const Permutation& mapping, const PairList& positives) {
  std::vector<bool> taken(mapping.size(), false);
  for (const auto& [i, j] : positives) taken[static_cast<std::size_t>(i)] = true;
  PairList out;
  for (std::size_t i = 0; i < mapping.size(); ++i) {
    if (!taken[i]) out.emplace_back(static_cast<Index>(i), mapping[i]);
  }
  return out;
}

PairAccuracy pair_accuracy(const PairList& pairs, std::span<const int> labels1, std::span<const int> labels2) {
  if (pairs.empty()) return {1.0, true};
  std::size_t hits = 0;
  for (const auto& [i, j] : pairs) {
    if (labels1[static_cast<std::size_t>(i)] == labels2[static_cast<std::size_t>(j)]) ++hits;
  }
  return {static_cast<double>(hits) / static_cast<double>(pairs.size()), false};
}

void write_assignment_dump(std::ostream& out, const Matrix& s, const Permutation& mapping,
                           const PairList& positives) {
  const auto old_flags = out.flags();
  const auto old_prec = out.precision();
  out << "# similarity " << s.rows() << "x" << s.cols() << "\n" << std::setprecision(6);
  for (Index i = 0; i < s.rows(); ++i) {
    for (Index j = 0; j < s.cols(); ++j) out << (j ? " " : "") << s(i, j);
    out << "\n";
  }
  out << "# assignment";
  for (Index j : mapping) out << " " << j;
  out << "\n# positives";
  for (const auto& [i, j] : positives) out << " " << i << ":" << j;
  out << "\n";
  out.flags(old_flags);
  out.precision(old_prec);
}

}  // namespace tabllp::pairing
