// SPDX-License-Identifier: Apache-2.0
#include "tabllp/train/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <stdexcept>

namespace tabllp::train {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw std::invalid_argument("config: '" + key + "' expects a number, got '" + text + "'");
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) {
    throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw std::invalid_argument("config: '" + key + "' expects true/false, got '" + text + "'");
}

template <typename E>
E pick(const std::string& key, const std::string& text, std::initializer_list<std::pair<const char*, E>> options) {
  for (const auto& [name, value] : options) {
    if (text == name) return value;
  }
  std::string allowed;
  for (const auto& [name, value] : options) allowed += (allowed.empty() ? "" : "|") + std::string(name);
  throw std::invalid_argument("config: '" + key + "' must be one of " + allowed + ", got '" + text + "'");
}

template <typename E>
std::string name_of(E value, std::initializer_list<std::pair<const char*, E>> options) {
  for (const auto& [name, v] : options) {
    if (v == value) return name;
  }
  return "?";
}

const std::initializer_list<std::pair<const char*, ValidationMode>> kModes = {{"fine", ValidationMode::Fine},
                                                                              {"coarse", ValidationMode::Coarse}};
const std::initializer_list<std::pair<const char*, CoarseMetric>> kCoarse = {{"mpiou", CoarseMetric::Mpiou},
                                                                             {"l1", CoarseMetric::L1}};
const std::initializer_list<std::pair<const char*, Augmentation>> kAug = {
    {"mixup-cutmix", Augmentation::MixupCutmix}, {"separated", Augmentation::Separated}};
const std::initializer_list<std::pair<const char*, Method>> kMethod = {{"bdc", Method::Bdc}, {"dllp", Method::Dllp}};
const std::initializer_list<std::pair<const char*, Assignment>> kAssign = {{"lsa", Assignment::Lsa},
                                                                           {"greedy", Assignment::Greedy}};
const std::initializer_list<std::pair<const char*, losses::ContrastiveObjective>> kObjective = {
    {"infonce", losses::ContrastiveObjective::InfoNce}, {"cosine", losses::ContrastiveObjective::CosineEmbedding}};
const std::initializer_list<std::pair<const char*, bagops::AggregatorVariant>> kAggregator = {
    {"weighted-sum-cosine", bagops::AggregatorVariant::WeightedSumCosine},
    {"query-softmax", bagops::AggregatorVariant::QuerySoftmax}};
const std::initializer_list<std::pair<const char*, bagops::WeightNorm>> kWeights = {
    {"softmax", bagops::WeightNorm::Softmax}, {"raw", bagops::WeightNorm::Raw}};

using Setter = std::function<void(TrainConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const TrainConfig&)>;

struct Field {
  Setter set;
  Getter get;
};

template <typename T>
Field int_field(T TrainConfig::*member) {
  return {[member](TrainConfig& c, const std::string& k, const std::string& v) {
            c.*member = static_cast<T>(parse_int(k, v));
          },
          [member](const TrainConfig& c) { return std::to_string(c.*member); }};
}

template <typename Outer, typename T>
Field nested_int(Outer TrainConfig::*outer, T Outer::*member) {
  return {[=](TrainConfig& c, const std::string& k, const std::string& v) {
            (c.*outer).*member = static_cast<T>(parse_int(k, v));
          },
          [=](const TrainConfig& c) { return std::to_string((c.*outer).*member); }};
}

template <typename Outer>
Field nested_double(Outer TrainConfig::*outer, double Outer::*member) {
  return {[=](TrainConfig& c, const std::string& k, const std::string& v) { (c.*outer).*member = parse_double(k, v); },
          [=](const TrainConfig& c) { return fmt((c.*outer).*member); }};
}

template <typename E>
Field enum_field(E TrainConfig::*member, std::initializer_list<std::pair<const char*, E>> options) {
  return {[=](TrainConfig& c, const std::string& k, const std::string& v) { c.*member = pick(k, v, options); },
          [=](const TrainConfig& c) { return name_of(c.*member, options); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"bag_size", int_field(&TrainConfig::bag_size)},
      {"pretrain_epochs", int_field(&TrainConfig::pretrain_epochs)},
      {"finetune_epochs", int_field(&TrainConfig::finetune_epochs)},
      {"patience", int_field(&TrainConfig::patience)},
      {"seed", int_field(&TrainConfig::seed)},
      {"validation_mode", enum_field(&TrainConfig::validation_mode, kModes)},
      {"coarse_metric", enum_field(&TrainConfig::coarse_metric, kCoarse)},
      {"augmentation", enum_field(&TrainConfig::augmentation, kAug)},
      {"method", enum_field(&TrainConfig::method, kMethod)},
      {"assignment", enum_field(&TrainConfig::assignment, kAssign)},
      {"objective", enum_field(&TrainConfig::objective, kObjective)},
      {"learning_rate",
       {[](TrainConfig& c, const std::string& k, const std::string& v) { c.learning_rate = parse_double(k, v); },
        [](const TrainConfig& c) { return fmt(c.learning_rate); }}},
      {"pretrain",
       {[](TrainConfig& c, const std::string& k, const std::string& v) {
          c.pretrain = pick<bool>(k, v, {{"bag", true}, {"none", false}});
        },
        [](const TrainConfig& c) { return std::string(c.pretrain ? "bag" : "none"); }}},
      {"tau", nested_double(&TrainConfig::loss, &losses::LossConfig::tau)},
      {"margin", nested_double(&TrainConfig::loss, &losses::LossConfig::margin)},
      {"kappa", nested_double(&TrainConfig::loss, &losses::LossConfig::kappa)},
      {"alpha", nested_double(&TrainConfig::loss, &losses::LossConfig::alpha)},
      {"beta", nested_double(&TrainConfig::loss, &losses::LossConfig::beta)},
      {"aggregator",
       {[](TrainConfig& c, const std::string& k, const std::string& v) { c.aggregator.variant = pick(k, v, kAggregator); },
        [](const TrainConfig& c) { return name_of(c.aggregator.variant, kAggregator); }}},
      {"aggregator_weights",
       {[](TrainConfig& c, const std::string& k, const std::string& v) { c.aggregator.weights = pick(k, v, kWeights); },
        [](const TrainConfig& c) { return name_of(c.aggregator.weights, kWeights); }}},
      {"use_projection",
       {[](TrainConfig& c, const std::string& k, const std::string& v) { c.aggregator.use_projection = parse_bool(k, v); },
        [](const TrainConfig& c) { return std::string(c.aggregator.use_projection ? "true" : "false"); }}},
      {"d_embed", nested_int(&TrainConfig::encoder, &model::EncoderConfig::d_embed)},
      {"hidden", nested_int(&TrainConfig::encoder, &model::EncoderConfig::hidden)},
      {"hidden_layers", nested_int(&TrainConfig::encoder, &model::EncoderConfig::hidden_layers)},
      {"d_rep", nested_int(&TrainConfig::encoder, &model::EncoderConfig::d_rep)},
      {"d_cls", nested_int(&TrainConfig::encoder, &model::EncoderConfig::d_cls)},
      {"head_hidden", nested_int(&TrainConfig::encoder, &model::EncoderConfig::head_hidden)},
      {"projector_hidden", nested_int(&TrainConfig::encoder, &model::EncoderConfig::projector_hidden)},
      {"decoder_hidden", nested_int(&TrainConfig::encoder, &model::EncoderConfig::decoder_hidden)},
      {"p_cutmix", nested_double(&TrainConfig::corruption, &model::CorruptionConfig::p_cutmix)},
      {"mixup_nu", nested_double(&TrainConfig::corruption, &model::CorruptionConfig::mixup_nu)},
  };
  return table;
}

}  // namespace

void TrainConfig::validate() const {
  if (bag_size < 2) throw std::invalid_argument("config: bag_size must be >= 2");
  if (pretrain_epochs < 0) throw std::invalid_argument("config: pretrain_epochs must be >= 0");
  if (finetune_epochs < 1) throw std::invalid_argument("config: finetune_epochs must be >= 1");
  if (patience < 1 || patience > finetune_epochs) {
    throw std::invalid_argument("config: patience must be in [1, finetune_epochs]");
  }
  if (!(learning_rate > 0.0)) throw std::invalid_argument("config: learning_rate must be > 0");
  if (!(corruption.p_cutmix > 0.0 && corruption.p_cutmix <= 1.0)) {
    throw std::invalid_argument("config: p_cutmix must be in (0, 1]");
  }
  if (!(corruption.mixup_nu > 0.0 && corruption.mixup_nu <= 1.0)) {
    throw std::invalid_argument("config: mixup_nu must be in (0, 1]");
  }
  loss.validate();
  encoder.validate();
}

std::map<std::string, std::string> to_entries(const TrainConfig& config) {
  std::map<std::string, std::string> out;
  for (const auto& [key, field] : fields()) out[key] = field.get(config);
  return out;
}

void apply_entry(TrainConfig& config, const std::string& key, const std::string& value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw std::invalid_argument("config: unknown key '" + key + "'");
  it->second.set(config, key, value);
}

bool is_train_key(const std::string& key) { return fields().count(key) != 0; }

std::uint64_t fingerprint(const std::map<std::string, std::string>& entries) {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [k, v] : entries) feed(k + "=" + v + "\n");
  return h;
}

}  // namespace tabllp::train
