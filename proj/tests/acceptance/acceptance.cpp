// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion at the end.
//
// Exit status is nonzero only when a correctness criterion (1-4, 8, 9)
// fails. The empirical comparisons (5-7) report FAIL honestly but do not
// change the exit status.
#include "cli_fixture.hpp"
#include "gradient_suite.hpp"
#include "helpers.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

#include "tabllp/losses/losses.hpp"
#include "tabllp/metrics/metrics.hpp"
#include "tabllp/pairing/pairing.hpp"
#include "tabllp/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

using namespace tabllp;
using data::Index;
using diff::Tensor;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int id = 0;
  bool pass = false;
  bool empirical = false;
  std::string summary;
  double seconds = 0.0;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome timed(int id, bool empirical, const std::function<Outcome()>& body) {
  std::cout << "-- criterion " << id << std::endl;
  const auto start = std::chrono::steady_clock::now();
  Outcome o = body();
  o.id = id;
  o.empirical = empirical;
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return o;
}

// 1 ---------------------------------------------------------------------

Outcome lsa_oracle() {
  testing::Rng rng(101);
  long mismatches = 0, total = 0;
  for (Index m = 2; m <= 7; ++m) {
    for (int trial = 0; trial < 1000; ++trial) {
      pairing::Matrix s = testing::random_matrix(m, m, rng);
      if (trial % 4 == 0) s = (s * 2.0).array().round() / 2.0;  // tie-heavy
      const auto brute = testing::brute_force_lsa(s);
      mismatches += pairing::assignment_sum(s, pairing::solve_lsa(s)) != brute.best_sum;
      ++total;
    }
  }
  return {0, mismatches == 0, false, std::to_string(total) + " matrices, m=2..7, " + std::to_string(mismatches) +
                                           " sum mismatches"};
}

// 2 ---------------------------------------------------------------------

Outcome gradient_suite() {
  bool ok = true;
  double worst = 0.0;
  std::size_t families = 0;
  for (const auto& family : testing::gradient_families()) {
    const auto r = testing::run_family(family, 20, 2024);
    std::cout << "   " << r.name << ": " << r.accepted << " configs (" << r.attempted
              << " drawn), max rel error " << r.max_rel_error << "\n";
    ok = ok && r.accepted >= 20 && r.max_rel_error < 1e-4;
    worst = std::max(worst, r.max_rel_error);
    ++families;
  }
  std::ostringstream s;
  s << families << " families x >=20 configs, worst rel error " << worst;
  return {0, ok, false, s.str()};
}

// 3 ---------------------------------------------------------------------

Outcome jensen_gap() {
  testing::Rng rng(303);
  int violations = 0;
  double tightest = 1e300;
  for (int trial = 0; trial < 10000; ++trial) {
    const Index m = std::uniform_int_distribution<Index>(1, 64)(rng);
    const Index c = std::uniform_int_distribution<Index>(2, 5)(rng);
    const Tensor probs = diff::softmax(Tensor(testing::random_matrix(m, c, rng, -4, 4)));
    std::vector<int> labels;
    data::LabelProportion p{Eigen::RowVectorXd::Zero(c)};
    for (Index i = 0; i < m; ++i) {
      labels.push_back(std::uniform_int_distribution<int>(0, static_cast<int>(c) - 1)(rng));
      p.entries(labels.back()) += 1.0 / static_cast<double>(m);
    }
    const double bag = losses::llp_loss(losses::mean_prediction(probs), p).item();
    const double inst = losses::instance_ce(probs, labels).item();
    violations += bag > inst + 1e-9;
    tightest = std::min(tightest, inst - bag);
  }
  return {0, violations == 0, false,
          "10000 bags, " + std::to_string(violations) + " violations, smallest gap " + sci(tightest)};
}

// 4 ---------------------------------------------------------------------

Outcome metric_invariants() {
  testing::Rng rng(404);
  long v_mpiou = 0, v_l1 = 0, v_auc = 0, v_acc = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index c = 2 + trial % 4;
    Eigen::RowVectorXd a = testing::random_proportion(c, rng).entries;
    const Eigen::RowVectorXd b = testing::random_proportion(c, rng).entries;
    if (trial % 5 == 0) {
      a(0) = 0.0;
      a /= a.sum();
    }
    const double m = metrics::mpiou(a, b);
    v_mpiou += !(m == metrics::mpiou(b, a) && m >= 0.0 && m < 1.0 && metrics::mpiou(a, a) == 1.0);
    const double l = metrics::l1_bag(a, b);
    v_l1 += !(l > 0.0 && l <= 2.0 + 1e-12 && l == metrics::l1_bag(b, a) && metrics::l1_bag(a, a) == 0.0);
  }
  std::uniform_int_distribution<int> size(2, 200), grid(0, 9);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = size(rng);
    std::vector<double> scores(static_cast<std::size_t>(n)), mapped(scores.size());
    std::vector<int> labels(scores.size()), flipped(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
      scores[i] = trial % 2 ? grid(rng) / 10.0 : std::uniform_real_distribution<>(0, 1)(rng);
      labels[i] = i == 0 ? 0 : i == 1 ? 1 : grid(rng) % 2;
      flipped[i] = 1 - labels[i];
      mapped[i] = std::exp(3.0 * scores[i]) - 7.0;
    }
    const double got = metrics::auc(scores, labels);
    v_auc += !(got == testing::brute_force_auc(scores, labels) && metrics::auc(mapped, labels) == got &&
               std::abs(metrics::auc(scores, flipped) - (1.0 - got)) < 1e-12);
  }
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = size(rng), classes = 2 + trial % 4;
    std::vector<int> y(static_cast<std::size_t>(n)), yhat(y.size());
    std::uniform_int_distribution<int> cls(0, classes - 1);
    long hits = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = cls(rng);
      yhat[i] = trial % 3 ? cls(rng) : y[i];
      hits += y[i] == yhat[i];
    }
    const double acc = metrics::accuracy(yhat, y);
    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> ys, yhats;
    for (auto i : order) {
      ys.push_back(y[i]);
      yhats.push_back(yhat[i]);
    }
    v_acc += !(acc == static_cast<double>(hits) / n && acc >= 0.0 && acc <= 1.0 && metrics::accuracy(yhats, ys) == acc &&
               (trial % 3 != 0 || acc == 1.0));
  }
  const long v = v_mpiou + v_l1 + v_auc + v_acc;
  std::ostringstream s;
  s << "1000 cases each; violations mpiou " << v_mpiou << ", l1 " << v_l1 << ", auc " << v_auc << ", accuracy "
    << v_acc;
  return {0, v == 0, false, s.str()};
}

// 5-8 shared runs --------------------------------------------------------

struct RunResult {
  double auc = 0.0;
  double pair_accuracy = 0.0;
  double pair_base_rate = 0.0;
  int epochs = 0;
  int best_epoch = 0;
  train::MetricsLog log;
};

RunResult run_once(const data::TabularDataset& raw, int bag_size, train::Method method, std::uint64_t seed) {
  const auto e = testing::make_experiment(raw, bag_size, data::BagStrategy::Ordered, seed);
  train::TrainConfig c;  // defaults throughout
  c.bag_size = bag_size;
  c.seed = seed;
  c.method = method;
  c.pretrain = method == train::Method::Bdc;
  train::Model model(e.dataset.schema(), e.dataset.num_classes(), c);
  const auto data = e.train_data();
  RunResult r;
  if (c.pretrain) train::pretrain(model, data, c, &r.log);
  const auto ft = train::finetune(model, data, c, &r.log);
  r.epochs = ft.epochs_run;
  r.best_epoch = ft.best_epoch;
  const auto report = train::evaluate(model, e.dataset, e.eval_inputs(), train::EvalMode::Full, c.assignment,
                                      train::derive_seed(seed, 200));
  r.auc = report.values.at("auc");
  if (report.values.count("pair_accuracy")) {
    r.pair_accuracy = report.values.at("pair_accuracy");
    r.pair_base_rate = report.values.at("pair_base_rate");
  }
  return r;
}

const data::TabularDataset& criterion_dataset() {
  static const data::TabularDataset raw = testing::make_synthetic({});
  return raw;
}

std::vector<RunResult> g_bdc, g_dllp;

Outcome bdc_vs_dllp() {
  std::vector<double> bdc, dllp;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    g_bdc.push_back(run_once(criterion_dataset(), 64, train::Method::Bdc, seed));
    g_dllp.push_back(run_once(criterion_dataset(), 64, train::Method::Dllp, seed));
    bdc.push_back(g_bdc.back().auc);
    dllp.push_back(g_dllp.back().auc);
    std::cout << "   seed " << seed << ": bdc " << fmt(bdc.back()) << " (best epoch " << g_bdc.back().best_epoch
              << " of " << g_bdc.back().epochs << "), dllp " << fmt(dllp.back()) << " (best epoch "
              << g_dllp.back().best_epoch << " of " << g_dllp.back().epochs << ")" << std::endl;
  }
  const double mb = median(bdc), md = median(dllp);
  return {0, mb >= md && mb >= 0.85, true,
          "median test AUC bdc " + fmt(mb) + " vs dllp " + fmt(md) + " (need bdc >= dllp and bdc >= 0.85)"};
}

Outcome pair_accuracy() {
  std::vector<double> acc, base;
  for (std::size_t k = 0; k < g_bdc.size(); ++k) {
    acc.push_back(g_bdc[k].pair_accuracy);
    base.push_back(g_bdc[k].pair_base_rate);
    std::cout << "   seed " << k << ": pair accuracy " << fmt(acc.back()) << ", base rate " << fmt(base.back())
              << "\n";
  }
  const double ma = median(acc), mb = median(base);
  return {0, !acc.empty() && ma >= mb + 0.10, true,
          "median pair accuracy " + fmt(ma) + " vs base rate " + fmt(mb) + " (need +0.10)"};
}

Outcome bag_size_trend() {
  std::vector<double> small, large;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    small.push_back(run_once(criterion_dataset(), 16, train::Method::Bdc, seed).auc);
    large.push_back(run_once(criterion_dataset(), 256, train::Method::Bdc, seed).auc);
    std::cout << "   seed " << seed << ": m=16 " << fmt(small.back()) << ", m=256 " << fmt(large.back())
              << std::endl;
  }
  const double a = median(small), b = median(large);
  return {0, a >= b - 0.02, true, "median test AUC m=16 " + fmt(a) + " vs m=256 " + fmt(b) + " (0.02 plateau)"};
}

Outcome ramp_exactness() {
  bool ok = true;
  for (int total : {1, 5, 50, 300}) {
    const auto first = losses::ramp_weights(train::ramp_time(0, total), total);
    const auto last = losses::ramp_weights(train::ramp_time(total - 1, total), total);
    if (total > 1) ok = ok && std::abs(first.lambda - std::exp(-5.0)) <= 1e-12;
    ok = ok && std::abs(last.lambda - 1.0) <= 1e-12 && std::abs(losses::ramp_weights(total, total).lambda - 1.0) <= 1e-12;
    ok = ok && std::abs(losses::ramp_weights(0, total).lambda - std::exp(-5.0)) <= 1e-12;
  }
  // logged weights of every fine-tuning run above, plus one uncut run
  std::vector<const train::MetricsLog*> logs;
  for (const auto& r : g_bdc) logs.push_back(&r.log);
  train::MetricsLog uncut;
  {
    testing::SyntheticSpec spec;
    spec.rows = 800;
    const auto e = testing::make_experiment(testing::make_synthetic(spec), 16, data::BagStrategy::Ordered, 1);
    train::TrainConfig c;
    c.bag_size = 16;
    c.finetune_epochs = 6;
    c.patience = 6;
    c.pretrain = false;
    train::Model model(e.dataset.schema(), e.dataset.num_classes(), c);
    train::finetune(model, e.train_data(), c, &uncut);
    std::vector<double> lambdas;
    for (const auto& rec : uncut.records())
      if (rec.split == "validation") lambdas.push_back(rec.lambda);
    ok = ok && lambdas.size() == 6 && lambdas.front() == std::exp(-5.0) && lambdas.back() == 1.0;
  }
  long checked = 0, mismatches = 0;
  auto check_log = [&](const train::MetricsLog& log, int total) {
    for (const auto& rec : log.records()) {
      if (rec.phase != "finetune") continue;
      const auto w = losses::ramp_weights(train::ramp_time(rec.epoch, total), total);
      mismatches += !(rec.lambda == w.lambda && rec.gamma == w.gamma);
      ++checked;
    }
  };
  for (const auto* log : logs) check_log(*log, 300);
  check_log(uncut, 6);
  ok = ok && mismatches == 0 && checked > 0;
  return {0, ok, false,
          "lambda(0)=e^-5 and lambda(T)=1 within 1e-12; " + std::to_string(checked) + " logged epochs, " +
              std::to_string(mismatches) + " mismatches"};
}

Outcome determinism() {
  const fs::path root = testing::scratch_dir("acceptance_determinism");
  testing::write_synthetic_csv(root / "data.csv", 1200, 6, 9);
  auto config = testing::small_pipeline_config(root / "data.csv", root / "a", 6);
  config.train.pretrain_epochs = 5;
  config.train.finetune_epochs = 20;
  config.train.patience = 5;
  testing::run_pipeline(config);
  config.output_dir = (root / "b").string();
  testing::run_pipeline(config);
  const char* artifacts[] = {"dataset.json", "bags.jsonl",         "pretrain.ckpt", "pretrain_log.jsonl",
                             "finetune.ckpt", "finetune_log.jsonl", "report.jsonl"};
  int differing = 0;
  for (const char* name : artifacts) {
    const bool same = testing::read_file(root / "a" / name) == testing::read_file(root / "b" / name);
    if (!same) std::cout << "   differs: " << name << "\n";
    differing += !same;
  }
  fs::remove_all(root);
  return {0, differing == 0, false,
          "two pipeline runs, 7 artifacts compared byte for byte, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main() {
  std::vector<Outcome> results;
  auto guarded = [&](int id, bool empirical, Outcome (*fn)()) {
    try {
      results.push_back(timed(id, empirical, fn));
    } catch (const std::exception& e) {
      results.push_back({id, false, empirical, std::string("threw: ") + e.what(), 0.0});
    }
  };
  guarded(1, false, lsa_oracle);
  guarded(2, false, gradient_suite);
  guarded(3, false, jensen_gap);
  guarded(4, false, metric_invariants);
  guarded(5, true, bdc_vs_dllp);
  guarded(6, true, pair_accuracy);
  guarded(7, true, bag_size_trend);
  guarded(8, false, ramp_exactness);
  guarded(9, false, determinism);

  std::cout << "\n";
  int hard_failures = 0;
  for (const auto& o : results) {
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << o.id << ": " << o.summary << " [" << fmt(o.seconds, 1)
              << " s]\n";
    hard_failures += !o.pass && !o.empirical;
  }
  return hard_failures == 0 ? 0 : 1;
}
