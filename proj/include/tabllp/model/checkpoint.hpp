// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tabllp/model/encoder.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace tabllp::model {

/// Binary checkpoint layout (little-endian):
///   magic "TLLPCKPT", u32 version,
///   u64 fingerprint, i64 epoch, f64 best_score,
///   u32 metadata count, then (u32 len, key bytes, u32 len, value bytes)...,
///   u32 array count, then (u32 len, name, i64 rows, i64 cols, rows*cols f64
///   in column-major order)...
/// Doubles are stored bit-exact.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::map<std::string, diff::Matrix> arrays;
  std::map<std::string, std::string> metadata;
  std::uint64_t fingerprint = 0;
  std::int64_t epoch = 0;
  double best_score = 0.0;

  static Checkpoint capture(const ParamList& params);
  /// Copies stored arrays into matching parameters. Throws when a parameter
  /// is absent or has a different shape, unless `allow_missing` is set.
  void restore(const ParamList& params, bool allow_missing = false) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tabllp::model
