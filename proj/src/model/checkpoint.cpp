// SPDX-License-Identifier: Apache-2.0
#include "tabllp/model/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace tabllp::model {

namespace {

constexpr char kMagic[8] = {'T', 'L', 'L', 'P', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_string(std::ostream& out, const std::string& s) {
  put(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

std::string get_string(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return s;
}

}  // namespace

Checkpoint Checkpoint::capture(const ParamList& params) {
  Checkpoint c;
  for (const auto& p : params) {
    if (!c.arrays.emplace(p.name, p.tensor.value()).second) {
      throw std::invalid_argument("checkpoint: duplicate parameter name " + p.name);
    }
  }
  return c;
}

void Checkpoint::restore(const ParamList& params, bool allow_missing) const {
  for (const auto& p : params) {
    auto it = arrays.find(p.name);
    if (it == arrays.end()) {
      if (allow_missing) continue;
      throw std::runtime_error("checkpoint: missing parameter " + p.name);
    }
    Tensor target = p.tensor;
    auto& dst = target.mutable_value();
    if (it->second.rows() != dst.rows() || it->second.cols() != dst.cols()) {
      throw std::runtime_error("checkpoint: shape mismatch for " + p.name);
    }
    dst = it->second;
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put(out, Checkpoint::kVersion);
  put(out, ckpt.fingerprint);
  put(out, ckpt.epoch);
  put(out, ckpt.best_score);
  put(out, static_cast<std::uint32_t>(ckpt.metadata.size()));
  for (const auto& [k, v] : ckpt.metadata) {
    put_string(out, k);
    put_string(out, v);
  }
  put(out, static_cast<std::uint32_t>(ckpt.arrays.size()));
  for (const auto& [name, m] : ckpt.arrays) {
    put_string(out, name);
    put(out, static_cast<std::int64_t>(m.rows()));
    put(out, static_cast<std::int64_t>(m.cols()));
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("checkpoint: bad magic in " + path.string());
  }
  const auto version = get<std::uint32_t>(in);
  if (version != Checkpoint::kVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint c;
  c.fingerprint = get<std::uint64_t>(in);
  c.epoch = get<std::int64_t>(in);
  c.best_score = get<double>(in);
  const auto nmeta = get<std::uint32_t>(in);
  for (std::uint32_t k = 0; k < nmeta; ++k) {
    auto key = get_string(in);
    c.metadata[key] = get_string(in);
  }
  const auto narrays = get<std::uint32_t>(in);
  for (std::uint32_t k = 0; k < narrays; ++k) {
    auto name = get_string(in);
    const auto rows = get<std::int64_t>(in);
    const auto cols = get<std::int64_t>(in);
    if (rows < 0 || cols < 0) throw std::runtime_error("checkpoint: negative shape for " + name);
    diff::Matrix m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint: truncated array " + name);
    c.arrays.emplace(std::move(name), std::move(m));
  }
  return c;
}

}  // namespace tabllp::model
