// SPDX-License-Identifier: Apache-2.0
#include "tabllp/cli/experiment_config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tabllp::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

train::EvalMode parse_eval_mode(const std::string& v) {
  if (v == "fine") return train::EvalMode::Fine;
  if (v == "coarse") return train::EvalMode::Coarse;
  if (v == "full") return train::EvalMode::Full;
  throw std::invalid_argument("config: 'eval_mode' must be one of fine|coarse|full, got '" + v + "'");
}

std::string eval_mode_name(train::EvalMode m) {
  switch (m) {
    case train::EvalMode::Fine: return "fine";
    case train::EvalMode::Coarse: return "coarse";
    default: return "full";
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path.string());
  return parse(in, path.string());
}

ExperimentConfig ExperimentConfig::parse(std::istream& in, const std::string& source) {
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (train::is_train_key(key)) {
    train::apply_entry(train, key, value);
  } else if (key == "input_csv") {
    input_csv = value;
  } else if (key == "columns") {
    columns = value;
  } else if (key == "label") {
    label = value;
  } else if (key == "dataset") {
    dataset = value;
  } else if (key == "bags") {
    bags = value;
  } else if (key == "checkpoint") {
    checkpoint = value;
  } else if (key == "output_dir") {
    output_dir = value;
  } else if (key == "split") {
    const auto parts = split_list(value);
    if (parts.size() != 3) throw std::invalid_argument("config: 'split' needs three fractions");
    for (std::size_t k = 0; k < 3; ++k) {
      try {
        split[k] = std::stod(parts[k]);
      } catch (const std::exception&) {
        throw std::invalid_argument("config: 'split' has a non-numeric fraction '" + parts[k] + "'");
      }
    }
  } else if (key == "bag_strategy") {
    bag_strategy = data::parse_bag_strategy(value);
  } else if (key == "eval_mode") {
    eval_mode = parse_eval_mode(value);
  } else if (key == "seeds") {
    seeds.clear();
    for (const auto& s : split_list(value)) {
      if (s.empty()) continue;
      try {
        seeds.push_back(std::stoull(s));
      } catch (const std::exception&) {
        throw std::invalid_argument("config: 'seeds' has a non-integer entry '" + s + "'");
      }
    }
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

void ExperimentConfig::set_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("override '" + assignment + "' is not key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::map<std::string, std::string> ExperimentConfig::entries() const {
  auto out = train::to_entries(train);
  out["input_csv"] = input_csv;
  out["columns"] = columns;
  out["label"] = label;
  out["dataset"] = dataset;
  out["bags"] = bags;
  out["checkpoint"] = checkpoint;
  out["output_dir"] = output_dir;
  out["split"] = fmt(split[0]) + "," + fmt(split[1]) + "," + fmt(split[2]);
  out["bag_strategy"] = data::to_string(bag_strategy);
  out["eval_mode"] = eval_mode_name(eval_mode);
  std::string s;
  for (auto v : seeds) s += (s.empty() ? "" : ",") + std::to_string(v);
  out["seeds"] = s;
  return out;
}

std::uint64_t ExperimentConfig::fingerprint() const {
  auto e = entries();
  for (const char* key : {"input_csv", "dataset", "bags", "checkpoint", "output_dir"}) e.erase(key);
  return train::fingerprint(e);
}

std::filesystem::path ExperimentConfig::dataset_file() const {
  return dataset.empty() ? std::filesystem::path(output_dir) / "dataset.json" : std::filesystem::path(dataset);
}

std::filesystem::path ExperimentConfig::bags_file() const {
  return bags.empty() ? std::filesystem::path(output_dir) / "bags.jsonl" : std::filesystem::path(bags);
}

std::vector<std::uint64_t> ExperimentConfig::seed_list() const {
  return seeds.empty() ? std::vector<std::uint64_t>{train.seed} : seeds;
}

std::filesystem::path ExperimentConfig::run_dir(std::uint64_t seed) const {
  if (seeds.empty()) return output_dir;
  return std::filesystem::path(output_dir) / ("seed_" + std::to_string(seed));
}

ExperimentConfig ExperimentConfig::for_seed(std::uint64_t seed) const {
  ExperimentConfig c = *this;
  c.train.seed = seed;
  return c;
}

}  // namespace tabllp::cli
