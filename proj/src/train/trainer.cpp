// SPDX-License-Identifier: Apache-2.0
#include "tabllp/train/trainer.hpp"

#include "tabllp/data/bagging.hpp"
#include "tabllp/losses/losses.hpp"
#include "tabllp/pairing/pairing.hpp"
#include "tabllp/train/optimizer.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tabllp::train {

namespace ops = tabllp::diff;
using diff::Matrix;
using diff::Tensor;

namespace {

enum Stream : std::uint64_t { kInit = 1, kPretrainPairs, kCorrupt, kFinetunePairs };

std::vector<Index> concat_members(const data::Bag& a, const data::Bag& b) {
  std::vector<Index> rows = a.members;
  rows.insert(rows.end(), b.members.begin(), b.members.end());
  return rows;
}

pairing::Permutation assign(const Matrix& s, Assignment a) {
  return a == Assignment::Greedy ? pairing::solve_greedy(s) : pairing::solve_lsa(s);
}

void check_bags(const std::vector<data::Bag>& bags, const char* phase) {
  if (bags.size() < 2) throw std::invalid_argument(std::string(phase) + ": need at least 2 training bags");
  for (const auto& b : bags) {
    if (b.size() != bags.front().size()) throw std::invalid_argument(std::string(phase) + ": bag sizes differ");
  }
}

[[noreturn]] void diverged(const char* phase, int epoch, std::size_t pair, const std::string& components) {
  std::ostringstream msg;
  msg << phase << " diverged at epoch " << epoch << ", pair " << pair << ": " << components;
  throw std::runtime_error(msg.str());
}

std::vector<int> labels_of(const data::TabularDataset& ds, std::span<const Index> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (Index r : rows) out.push_back(ds.label(r));
  return out;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  // splitmix64 finaliser over a combination of the three words.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1) + 0xbf58476d1ce4e5b9ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Model::Model(const std::vector<data::ColumnSchema>& schema, int classes, const TrainConfig& config)
    : num_classes(classes) {
  config.validate();
  if (classes < 2) throw std::invalid_argument("model: need at least 2 classes");
  const auto& ec = config.encoder;
  model::Rng rng(derive_seed(config.seed, kInit));
  encoder = model::Encoder(schema, ec, rng);
  head = model::PredictionHead(ec.d_rep, ec.head_hidden, classes, rng);
  aggregator = bagops::Aggregator(ec.d_rep, ec.projector_hidden, config.aggregator, rng);
  const int feature_width = ec.d_rep - ec.d_cls;
  if (config.augmentation == Augmentation::Separated) {
    view1 = model::make_projector(ec.d_cls, ec.projector_hidden, ec.projector_hidden, rng);
    view2 = model::make_projector(feature_width, ec.projector_hidden, ec.projector_hidden, rng);
  } else {
    view1 = model::make_projector(ec.d_rep, ec.projector_hidden, ec.projector_hidden, rng);
    view2 = model::make_projector(ec.d_rep, ec.projector_hidden, ec.projector_hidden, rng);
  }
  decoders = model::Decoders(schema, feature_width, ec.decoder_hidden, rng);
}

ParamList Model::pretrain_params() const {
  ParamList out;
  encoder.collect("encoder", out);
  aggregator.collect("aggregator", out);
  view1.collect("view1", out);
  view2.collect("view2", out);
  decoders.collect("decoder", out);
  return out;
}

ParamList Model::finetune_params() const {
  ParamList out;
  encoder.collect("encoder", out);
  head.collect("head", out);
  return out;
}

ParamList Model::all_params() const {
  ParamList out;
  encoder.collect("encoder", out);
  head.collect("head", out);
  aggregator.collect("aggregator", out);
  view1.collect("view1", out);
  view2.collect("view2", out);
  decoders.collect("decoder", out);
  return out;
}

Matrix Model::represent(const data::Batch& batch) const {
  diff::NoGradGuard guard;
  return encoder.encode(batch).value();
}

Matrix Model::probabilities(const data::Batch& batch) const {
  diff::NoGradGuard guard;
  return head.predict(encoder.encode(batch)).value();
}

double ramp_time(int epoch, int total) {
  if (total < 1) throw std::invalid_argument("ramp_time: total must be >= 1");
  if (epoch < 0 || epoch >= total) throw std::invalid_argument("ramp_time: epoch out of range");
  if (total == 1) return 1.0;
  return static_cast<double>(epoch) * static_cast<double>(total) / static_cast<double>(total - 1);
}

losses::PretrainTerms pretrain_pair_loss(const Model& model, const data::Batch& batch, Index m,
                                         const data::LabelProportion& p1, const data::LabelProportion& p2,
                                         const TrainConfig& config, model::Rng& noise) {
  if (batch.rows() != 2 * m) throw std::invalid_argument("pretrain_pair_loss: batch must hold two bags of size m");
  const int d_cls = config.encoder.d_cls;
  const Index feature_width = config.encoder.d_rep - d_cls;
  const Tensor z = model.encoder.encode(batch);
  std::vector<Index> first(static_cast<std::size_t>(m)), second(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    first[static_cast<std::size_t>(i)] = i;
    second[static_cast<std::size_t>(i)] = m + i;
  }
  losses::PretrainInputs in;
  in.p1 = p1;
  in.p2 = p2;
  in.b1 = model.aggregator(ops::gather_rows(z, first));
  in.b2 = model.aggregator(ops::gather_rows(z, second));
  if (config.loss.beta != 0.0) {
    Tensor recon_source;
    if (config.augmentation == Augmentation::MixupCutmix) {
      const Tensor z_noisy = model.encoder.trunk(model::corrupt(model.encoder, batch, config.corruption, noise));
      in.view = model.view1(z);
      in.other_view = model.view2(z_noisy);
      recon_source = ops::slice_cols(z_noisy, d_cls, feature_width);
    } else {
      const model::Views v = model::views(z, d_cls);
      in.view = model.view1(v.cls);
      in.other_view = model.view2(v.feature);
      recon_source = v.feature;
    }
    in.decoded = model.decoders.reconstruct(recon_source);
    in.original = &batch;
    in.schema = &model.encoder.schema();
  }
  return losses::pretrain_loss(in, config.loss);
}

losses::FinetuneTerms finetune_pair_loss(const Model& model, const data::Batch& batch1, const data::Batch& batch2,
                                         const data::LabelProportion& p1, const data::LabelProportion& p2,
                                         double t, const TrainConfig& config, const PairSets* fixed,
                                         PairSets* used) {
  const Tensor z1 = model.encoder.encode(batch1);
  const Tensor z2 = model.encoder.encode(batch2);
  const Tensor probs1 = model.head.predict(z1);
  const Tensor probs2 = model.head.predict(z2);
  if (config.method == Method::Dllp) {
    losses::FinetuneTerms terms;
    terms.llp = losses::dllp_loss(probs1, probs2, p1, p2);
    terms.contrastive = Tensor::scalar(0.0);
    terms.total = terms.llp;
    terms.empty_positives = true;
    return terms;
  }
  if (!z1.value().allFinite() || !z2.value().allFinite()) {
    // no pairing on broken representations; the caller reports divergence
    losses::FinetuneTerms terms;
    terms.llp = losses::dllp_loss(probs1, probs2, p1, p2);
    terms.contrastive = Tensor::scalar(std::numeric_limits<double>::quiet_NaN());
    terms.total = terms.contrastive;
    terms.weights = losses::ramp_weights(t, config.finetune_epochs);
    return terms;
  }
  PairSets sets;
  if (fixed) {
    sets = *fixed;
  } else {
    const Matrix s = pairing::similarity_matrix(z1.value(), z2.value());
    const auto pi = assign(s, config.assignment);
    sets.positives = pairing::select_positives(s, pi, pairing::n_pos(p1, p2, batch1.rows()));
    if (config.objective == losses::ContrastiveObjective::CosineEmbedding) {
      sets.negatives = pairing::remaining_pairs(pi, sets.positives);
    }
  }
  if (used) *used = sets;
  const losses::FinetuneInputs in{z1, z2, probs1, probs2, p1, p2, sets.positives, sets.negatives};
  return losses::finetune_loss(in, t, config.finetune_epochs, config.loss, config.objective);
}

PhaseResult pretrain(Model& model, const TrainData& data, const TrainConfig& config, MetricsLog* log) {
  config.validate();
  check_bags(data.train_bags, "pretrain");
  const data::TabularDataset& ds = *data.dataset;
  const ParamList params = model.pretrain_params();
  Adam adam(config.learning_rate);
  model::Rng noise(derive_seed(config.seed, kCorrupt));

  PhaseResult result;
  for (int epoch = 0; epoch < config.pretrain_epochs; ++epoch) {
    const auto pairs = data::pair_bags(data.train_bags.size(), derive_seed(config.seed, kPretrainPairs, epoch));
    double epoch_loss = 0.0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const data::Bag& bag1 = data.train_bags[pairs[k].first];
      const data::Bag& bag2 = data.train_bags[pairs[k].second];
      const std::vector<Index> rows = concat_members(bag1, bag2);
      const data::Batch batch = ds.gather(rows);

      zero_grads(params);
      const losses::PretrainTerms terms =
          pretrain_pair_loss(model, batch, bag1.size(), bag1.proportion, bag2.proportion, config, noise);
      const double value = terms.total.item();
      if (!std::isfinite(value)) {
        std::ostringstream c;
        c << "bag=" << terms.bag.item() << " self=" << terms.self_contrastive.item()
          << " recon=" << terms.reconstruction.item();
        diverged("pretrain", epoch, k, c.str());
      }
      diff::backward(terms.total);
      adam.step(params);
      epoch_loss += value;
    }
    result.epochs_run = epoch + 1;
    if (log) {
      log->add({"pretrain", epoch, "train", "loss", epoch_loss / static_cast<double>(pairs.size()), 0.0, 0.0});
    }
  }
  result.best_epoch = result.epochs_run - 1;
  result.checkpoint = model::Checkpoint::capture(params);
  result.checkpoint.epoch = result.epochs_run;
  return result;
}

double validation_score(const Model& model, const TrainData& data, const TrainConfig& config) {
  const data::TabularDataset& ds = *data.dataset;
  if (config.validation_mode == ValidationMode::Fine) {
    if (data.validation_rows.empty()) throw std::invalid_argument("fine validation needs validation rows");
    const Matrix probs = model.probabilities(ds.gather(data.validation_rows));
    const std::vector<int> labels = labels_of(ds, data.validation_rows);
    if (model.num_classes == 2) {
      std::vector<double> scores(static_cast<std::size_t>(probs.rows()));
      for (Index i = 0; i < probs.rows(); ++i) scores[static_cast<std::size_t>(i)] = probs(i, 1);
      return metrics::auc(scores, labels);
    }
    std::vector<int> predicted(static_cast<std::size_t>(probs.rows()));
    for (Index i = 0; i < probs.rows(); ++i) {
      Index arg = 0;
      probs.row(i).maxCoeff(&arg);
      predicted[static_cast<std::size_t>(i)] = static_cast<int>(arg);
    }
    return metrics::accuracy(predicted, labels);
  }
  if (data.validation_bags.empty()) throw std::invalid_argument("coarse validation needs validation bags");
  double total = 0.0;
  for (const auto& bag : data.validation_bags) {
    const Eigen::RowVectorXd p_hat = model.probabilities(ds.gather(bag.members)).colwise().mean();
    total += config.coarse_metric == CoarseMetric::Mpiou ? metrics::mpiou(p_hat, bag.proportion.entries)
                                                         : -metrics::l1_bag(p_hat, bag.proportion.entries);
  }
  return total / static_cast<double>(data.validation_bags.size());
}

PhaseResult finetune(Model& model, const TrainData& data, const TrainConfig& config, MetricsLog* log) {
  config.validate();
  check_bags(data.train_bags, "finetune");
  const data::TabularDataset& ds = *data.dataset;
  const ParamList params = model.finetune_params();
  Adam adam(config.learning_rate);
  const int total = config.finetune_epochs;
  const std::string metric_name =
      config.validation_mode == ValidationMode::Fine
          ? (model.num_classes == 2 ? "auc" : "accuracy")
          : (config.coarse_metric == CoarseMetric::Mpiou ? "mpiou" : "neg_l1");

  PhaseResult result;
  result.best_score = -std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int epoch = 0; epoch < total; ++epoch) {
    const double t = ramp_time(epoch, total);
    losses::RampWeights w{0.0, 1.0};
    if (config.method == Method::Bdc) w = losses::ramp_weights(t, total);
    const auto pairs = data::pair_bags(data.train_bags.size(), derive_seed(config.seed, kFinetunePairs, epoch));
    double epoch_loss = 0.0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const data::Bag& bag1 = data.train_bags[pairs[k].first];
      const data::Bag& bag2 = data.train_bags[pairs[k].second];
      zero_grads(params);
      const losses::FinetuneTerms terms = finetune_pair_loss(model, ds.gather(bag1.members), ds.gather(bag2.members),
                                                             bag1.proportion, bag2.proportion, t, config);
      const Tensor& loss = terms.total;
      std::ostringstream c;
      c << "contrastive=" << terms.contrastive.item() << " llp=" << terms.llp.item();
      const std::string components = c.str();
      const double value = loss.item();
      if (!std::isfinite(value)) diverged("finetune", epoch, k, components);
      diff::backward(loss);
      adam.step(params);
      epoch_loss += value;
    }
    const double score = validation_score(model, data, config);
    result.epochs_run = epoch + 1;
    if (log) {
      log->add({"finetune", epoch, "train", "loss", epoch_loss / static_cast<double>(pairs.size()), w.lambda, w.gamma});
      log->add({"finetune", epoch, "validation", metric_name, score, w.lambda, w.gamma});
    }
    if (score > result.best_score) {
      result.best_score = score;
      result.best_epoch = epoch;
      result.checkpoint = model::Checkpoint::capture(params);
      stale = 0;
    } else if (++stale >= config.patience) {
      result.stopped_early = true;
      break;
    }
  }
  if (result.best_epoch < 0) result.checkpoint = model::Checkpoint::capture(params);
  result.checkpoint.restore(params);
  result.checkpoint.epoch = result.best_epoch;
  result.checkpoint.best_score = result.best_score;
  return result;
}

metrics::MetricsReport evaluate(const Model& model, const data::TabularDataset& ds, const EvalInputs& inputs,
                                EvalMode mode, Assignment assignment, std::uint64_t pair_seed) {
  metrics::MetricsReport report;
  if (mode != EvalMode::Coarse) {
    if (inputs.test_rows.empty()) throw std::invalid_argument("evaluate: fine mode needs test rows");
    const Matrix probs = model.probabilities(ds.gather(inputs.test_rows));
    const std::vector<int> labels = labels_of(ds, inputs.test_rows);
    if (model.num_classes == 2) {
      std::vector<double> scores(static_cast<std::size_t>(probs.rows()));
      for (Index i = 0; i < probs.rows(); ++i) scores[static_cast<std::size_t>(i)] = probs(i, 1);
      report.values["auc"] = metrics::auc(scores, labels);
    } else {
      std::vector<int> predicted(static_cast<std::size_t>(probs.rows()));
      for (Index i = 0; i < probs.rows(); ++i) {
        Index arg = 0;
        probs.row(i).maxCoeff(&arg);
        predicted[static_cast<std::size_t>(i)] = static_cast<int>(arg);
      }
      report.values["accuracy"] = metrics::accuracy(predicted, labels);
    }
  }
  if (mode != EvalMode::Fine) {
    if (inputs.test_bags.empty()) throw std::invalid_argument("evaluate: coarse mode needs test bags");
    double sum_mpiou = 0.0, sum_l1 = 0.0;
    for (std::size_t k = 0; k < inputs.test_bags.size(); ++k) {
      const auto& bag = inputs.test_bags[k];
      const Eigen::RowVectorXd p_hat = model.probabilities(ds.gather(bag.members)).colwise().mean();
      metrics::MetricsReport::BagRow row{static_cast<Index>(k), metrics::mpiou(p_hat, bag.proportion.entries),
                                         metrics::l1_bag(p_hat, bag.proportion.entries)};
      sum_mpiou += row.mpiou;
      sum_l1 += row.l1;
      report.bags.push_back(row);
    }
    const auto n = static_cast<double>(inputs.test_bags.size());
    report.values["mpiou"] = sum_mpiou / n;
    report.values["l1"] = sum_l1 / n;
  }

  // CAS over the test representations.
  std::vector<Index> cas_rows = inputs.test_rows;
  if (cas_rows.empty()) {
    for (const auto& bag : inputs.test_bags) cas_rows.insert(cas_rows.end(), bag.members.begin(), bag.members.end());
  }
  if (!cas_rows.empty()) {
    const metrics::CasResult c = metrics::cas(model.represent(ds.gather(cas_rows)), labels_of(ds, cas_rows));
    report.values["cas"] = c.score;
    if (c.degenerate) report.info["cas_degenerate"] = "true";
  }

  if (inputs.validation_bags.size() >= 2) {
    std::size_t hits = 0, pairs_total = 0;
    double base = 0.0;
    for (const auto& [a, b] : data::pair_bags(inputs.validation_bags.size(), pair_seed)) {
      const auto& bag1 = inputs.validation_bags[a];
      const auto& bag2 = inputs.validation_bags[b];
      const Matrix z1 = model.represent(ds.gather(bag1.members));
      const Matrix z2 = model.represent(ds.gather(bag2.members));
      const Matrix s = pairing::similarity_matrix(z1, z2);
      const auto pi = assign(s, assignment);
      const auto positives = pairing::select_positives(s, pi, pairing::n_pos(bag1.proportion, bag2.proportion, bag1.size()));
      const auto l1 = labels_of(ds, bag1.members);
      const auto l2 = labels_of(ds, bag2.members);
      const auto acc = pairing::pair_accuracy(positives, l1, l2);
      if (acc.empty) continue;
      hits += static_cast<std::size_t>(std::llround(acc.value * static_cast<double>(positives.size())));
      pairs_total += positives.size();
      base += static_cast<double>(positives.size()) * bag1.proportion.entries.dot(bag2.proportion.entries);
    }
    if (pairs_total > 0) {
      report.values["pair_accuracy"] = static_cast<double>(hits) / static_cast<double>(pairs_total);
      report.values["pair_base_rate"] = base / static_cast<double>(pairs_total);
    } else {
      report.info["pair_accuracy"] = "undefined: no positive pairs";
    }
  }
  return report;
}

}  // namespace tabllp::train
