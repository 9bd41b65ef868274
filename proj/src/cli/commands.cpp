// SPDX-License-Identifier: Apache-2.0
#include "tabllp/cli/commands.hpp"

#include "tabllp/data/bagging.hpp"
#include "tabllp/data/csv.hpp"
#include "tabllp/data/io.hpp"
#include "tabllp/data/preprocess.hpp"
#include "tabllp/metrics/metrics.hpp"
#include "tabllp/model/checkpoint.hpp"
#include "tabllp/train/trainer.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tabllp::cli {

namespace fs = std::filesystem;

namespace {

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw std::runtime_error(what + " not found: " + p.string());
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
}

std::map<std::string, std::string> metadata_for(const ExperimentConfig& config, const std::string& phase) {
  std::map<std::string, std::string> meta = train::to_entries(config.train);
  meta["phase"] = phase;
  return meta;
}

struct Loaded {
  data::PreparedData prepared;
  data::BagSets bags;
};

Loaded load_inputs(const ExperimentConfig& config) {
  require_file(config.dataset_file(), "dataset file");
  require_file(config.bags_file(), "bag file");
  Loaded l{data::read_prepared(config.dataset_file()), data::read_bags(config.bags_file())};
  return l;
}

train::TrainData train_data(const Loaded& l) {
  train::TrainData d;
  d.dataset = &l.prepared.dataset;
  if (l.bags.count("train")) d.train_bags = l.bags.at("train");
  if (l.bags.count("validation")) d.validation_bags = l.bags.at("validation");
  d.validation_rows = l.prepared.split.validation;
  return d;
}

fs::path checkpoint_path(const ExperimentConfig& config, const fs::path& fallback) {
  return config.checkpoint.empty() ? fallback : fs::path(config.checkpoint);
}

void warn_fingerprint(const model::Checkpoint& ckpt, const ExperimentConfig& config, std::ostream& err) {
  if (ckpt.fingerprint != config.fingerprint()) {
    err << "warning: checkpoint fingerprint " << ckpt.fingerprint << " differs from config fingerprint "
        << config.fingerprint() << "\n";
  }
}

bool is_sweep_command(const std::string& name) {
  return name == "pretrain" || name == "finetune" || name == "evaluate";
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"preprocess", "bag", "pretrain", "finetune", "evaluate", "report"};
  return names;
}

void cmd_preprocess(const ExperimentConfig& config, std::ostream& out) {
  if (config.input_csv.empty()) throw std::invalid_argument("preprocess: 'input_csv' is not set");
  if (config.columns.empty()) throw std::invalid_argument("preprocess: 'columns' is not set");
  if (config.label.empty()) throw std::invalid_argument("preprocess: 'label' is not set");
  require_file(config.input_csv, "input CSV");
  prepare_dir(config.output_dir);

  const auto decl = data::SchemaDeclaration::parse(config.columns, config.label);
  const data::TabularDataset raw = data::ingest_csv(config.input_csv, decl);
  data::PreparedData prepared;
  prepared.split = data::split(raw.rows(), config.split, config.train.seed);
  prepared.dataset = data::preprocess(raw, prepared.split.train);
  prepared.fingerprint = config.fingerprint();
  data::write_prepared(config.dataset_file(), prepared);

  std::ofstream report(fs::path(config.output_dir) / "schema.txt", std::ios::binary);
  data::write_schema_report(report, raw);
  data::write_schema_report(out, raw);
  out << "split train/test/validation: " << prepared.split.train.size() << "/" << prepared.split.test.size() << "/"
      << prepared.split.validation.size() << "\n";
}

void cmd_bag(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  require_file(config.dataset_file(), "dataset file");
  prepare_dir(fs::path(config.bags_file()).parent_path().empty() ? fs::path(".")
                                                                  : fs::path(config.bags_file()).parent_path());
  const data::PreparedData prepared = data::read_prepared(config.dataset_file());
  const auto m = static_cast<data::Index>(config.train.bag_size);
  data::BagSets sets;
  const std::pair<const char*, const std::vector<data::Index>*> splits[] = {
      {"train", &prepared.split.train}, {"validation", &prepared.split.validation}, {"test", &prepared.split.test}};
  std::uint64_t stream = 0;
  for (const auto& [name, rows] : splits) {
    ++stream;
    if (static_cast<data::Index>(rows->size()) < m && std::string(name) != "train") {
      err << "warning: " << name << " split has " << rows->size() << " rows, fewer than bag_size " << m
          << "; no " << name << " bags\n";
      sets[name] = {};
      continue;
    }
    sets[name] = data::make_bags(prepared.dataset, *rows, m, config.bag_strategy,
                                 train::derive_seed(config.train.seed, 100 + stream));
  }
  data::write_bags(config.bags_file(), sets, config.fingerprint());
  for (const auto& [name, list] : sets) out << name << ": " << list.size() << " bags of " << m << "\n";
}

void cmd_pretrain(const ExperimentConfig& config, std::ostream& out) {
  if (!config.train.pretrain) {
    out << "pretrain=none: skipping phase 1\n";
    return;
  }
  const Loaded l = load_inputs(config);
  const fs::path dir = config.run_dir(config.train.seed);
  prepare_dir(dir);
  const data::TabularDataset& ds = l.prepared.dataset;
  train::Model model(ds.schema(), ds.num_classes(), config.train);
  train::MetricsLog log;
  ds.reset_label_reads();
  train::PhaseResult r = train::pretrain(model, train_data(l), config.train, &log);
  if (ds.label_reads() != 0) throw std::logic_error("pretrain read instance labels");
  r.checkpoint.fingerprint = config.fingerprint();
  r.checkpoint.metadata = metadata_for(config, "pretrain");
  model::save_checkpoint(r.checkpoint, dir / "pretrain.ckpt");
  log.write(dir / "pretrain_log.jsonl", config.fingerprint());
  out << "seed " << config.train.seed << ": pretrained " << r.epochs_run << " epochs -> "
      << (dir / "pretrain.ckpt").string() << "\n";
}

void cmd_finetune(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  const fs::path dir = config.run_dir(config.train.seed);
  const fs::path init = checkpoint_path(config, dir / "pretrain.ckpt");
  if (config.train.pretrain) require_file(init, "pretrained checkpoint");
  const Loaded l = load_inputs(config);
  prepare_dir(dir);
  const data::TabularDataset& ds = l.prepared.dataset;
  train::Model model(ds.schema(), ds.num_classes(), config.train);
  if (config.train.pretrain) {
    const model::Checkpoint ckpt = model::load_checkpoint(init);
    warn_fingerprint(ckpt, config, err);
    ckpt.restore(model.all_params(), /*allow_missing=*/true);
  }
  train::MetricsLog log;
  ds.reset_label_reads();
  train::PhaseResult r = train::finetune(model, train_data(l), config.train, &log);
  if (config.train.validation_mode == train::ValidationMode::Coarse && ds.label_reads() != 0) {
    throw std::logic_error("coarse-validated finetune read instance labels");
  }
  r.checkpoint.fingerprint = config.fingerprint();
  r.checkpoint.metadata = metadata_for(config, "finetune");
  model::save_checkpoint(r.checkpoint, dir / "finetune.ckpt");
  log.write(dir / "finetune_log.jsonl", config.fingerprint());
  out << "seed " << config.train.seed << ": finetuned " << r.epochs_run << " epochs, best epoch " << r.best_epoch
      << " score " << std::setprecision(6) << r.best_score << (r.stopped_early ? " (early stop)" : "") << "\n";
}

void cmd_evaluate(const ExperimentConfig& config, std::ostream& out) {
  const fs::path dir = config.run_dir(config.train.seed);
  const fs::path ckpt_path = checkpoint_path(config, dir / "finetune.ckpt");
  require_file(ckpt_path, "finetuned checkpoint");
  const Loaded l = load_inputs(config);
  prepare_dir(dir);
  const data::TabularDataset& ds = l.prepared.dataset;
  train::Model model(ds.schema(), ds.num_classes(), config.train);
  const model::Checkpoint ckpt = model::load_checkpoint(ckpt_path);
  ckpt.restore(model.finetune_params());

  train::EvalInputs inputs;
  inputs.test_rows = l.prepared.split.test;
  if (l.bags.count("test")) inputs.test_bags = l.bags.at("test");
  if (l.bags.count("validation")) inputs.validation_bags = l.bags.at("validation");
  train::EvalMode mode = config.eval_mode;
  if (mode == train::EvalMode::Full && inputs.test_bags.empty()) mode = train::EvalMode::Fine;
  metrics::MetricsReport report =
      train::evaluate(model, ds, inputs, mode, config.train.assignment, train::derive_seed(config.train.seed, 200));
  report.info["fingerprint"] = std::to_string(config.fingerprint());
  report.info["seed"] = std::to_string(config.train.seed);

  std::ofstream table(dir / "report.txt", std::ios::binary);
  metrics::write_table(table, report);
  std::ofstream records(dir / "report.jsonl", std::ios::binary);
  metrics::write_records(records, report);
  metrics::write_table(out, report);
}

void cmd_report(const ExperimentConfig& config, std::ostream& out) {
  const auto seeds = config.seed_list();
  std::vector<fs::path> files;
  for (auto s : seeds) {
    files.push_back(config.run_dir(s) / "report.jsonl");
    require_file(files.back(), "report");
  }
  std::map<std::string, std::vector<double>> values;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto rec = nlohmann::json::parse(line);
      if (rec.contains("metric")) values[rec.at("metric").get<std::string>()].push_back(rec.at("value").get<double>());
    }
  }
  std::ostringstream table;
  table << std::left << std::setw(16) << "metric" << std::setw(6) << "runs" << std::setw(12) << "median"
        << std::setw(12) << "mean" << "min..max\n";
  table << std::fixed << std::setprecision(4);
  for (auto& [name, v] : values) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    const double median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    table << std::setw(16) << name << std::setw(6) << n << std::setw(12) << median << std::setw(12) << mean
          << v.front() << ".." << v.back() << "\n";
  }
  table << "fingerprint " << config.fingerprint() << "\n";
  prepare_dir(config.output_dir);
  std::ofstream(fs::path(config.output_dir) / "summary.txt", std::ios::binary) << table.str();
  out << table.str();
}

void run_command(const std::string& name, const ExperimentConfig& config, int jobs, std::ostream& out,
                 std::ostream& err) {
  config.train.validate();
  if (name == "preprocess") return cmd_preprocess(config, out);
  if (name == "bag") return cmd_bag(config, out, err);
  if (name == "report") return cmd_report(config, out);
  if (!is_sweep_command(name)) throw std::invalid_argument("unknown command '" + name + "'");

  const auto seeds = config.seed_list();
  std::vector<std::ostringstream> outs(seeds.size()), errs(seeds.size());
  std::vector<std::exception_ptr> failures(seeds.size());
  auto run_one = [&](std::size_t k) {
    try {
      const ExperimentConfig c = config.for_seed(seeds[k]);
      if (name == "pretrain") cmd_pretrain(c, outs[k]);
      if (name == "finetune") cmd_finetune(c, outs[k], errs[k]);
      if (name == "evaluate") cmd_evaluate(c, outs[k]);
    } catch (...) {
      failures[k] = std::current_exception();
    }
  };
  const auto workers = static_cast<std::size_t>(std::clamp<int>(jobs, 1, static_cast<int>(seeds.size())));
  if (workers == 1) {
    for (std::size_t k = 0; k < seeds.size(); ++k) run_one(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < seeds.size(); k = next++) run_one(k);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    out << outs[k].str();
    err << errs[k].str();
  }
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    if (failures[k]) std::rethrow_exception(failures[k]);
  }
}

}  // namespace tabllp::cli
