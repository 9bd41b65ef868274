// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace tabllp::train {

struct EpochRecord {
  std::string phase;  // "pretrain" or "finetune"
  int epoch = 0;
  std::string split;
  std::string metric;
  double value = 0.0;
  double lambda = 0.0;
  double gamma = 0.0;
};

/// Per-epoch records, written one JSON object per line.
class MetricsLog {
 public:
  void add(EpochRecord record) { records_.push_back(std::move(record)); }
  const std::vector<EpochRecord>& records() const { return records_; }
  void clear() { records_.clear(); }

  /// Header line {"fingerprint": ...} then one line per record.
  void write(std::ostream& out, std::uint64_t fingerprint) const;
  void write(const std::filesystem::path& path, std::uint64_t fingerprint) const;

 private:
  std::vector<EpochRecord> records_;
};

}  // namespace tabllp::train
