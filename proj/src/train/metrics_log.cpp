// SPDX-License-Identifier: Apache-2.0
#include "tabllp/train/metrics_log.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

namespace tabllp::train {

void MetricsLog::write(std::ostream& out, std::uint64_t fingerprint) const {
  out << nlohmann::json{{"fingerprint", fingerprint}}.dump() << "\n";
  for (const auto& r : records_) {
    nlohmann::json j = {{"phase", r.phase}, {"epoch", r.epoch}, {"split", r.split}, {"metric", r.metric},
                        {"value", r.value}, {"lambda", r.lambda}, {"gamma", r.gamma}};
    out << j.dump() << "\n";
  }
}

void MetricsLog::write(const std::filesystem::path& path, std::uint64_t fingerprint) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write(out, fingerprint);
}

}  // namespace tabllp::train
