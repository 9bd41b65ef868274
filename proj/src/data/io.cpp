// SPDX-License-Identifier: Apache-2.0
#include "tabllp/data/io.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace tabllp::data {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return in;
}

json indices(const std::vector<Index>& v) {
  json a = json::array();
  for (Index i : v) a.push_back(i);
  return a;
}

std::vector<Index> indices(const json& a) { return a.get<std::vector<Index>>(); }

}  // namespace

void write_prepared(const std::filesystem::path& path, const PreparedData& data) {
  const TabularDataset& ds = data.dataset;
  json schema = json::array();
  for (const auto& col : ds.schema()) {
    schema.push_back({{"name", col.name},
                      {"kind", to_string(col.kind)},
                      {"cardinality", col.cardinality},
                      {"levels", col.levels},
                      {"mean", col.mean},
                      {"std", col.std},
                      {"standardized", col.standardized}});
  }
  json values = json::array(), missing = json::array();
  for (Index r = 0; r < ds.rows(); ++r) {
    json vr = json::array(), mr = json::array();
    for (Index c = 0; c < ds.cols(); ++c) {
      vr.push_back(ds.values()(r, c));
      mr.push_back(ds.missing()(r, c) ? 1 : 0);
    }
    values.push_back(std::move(vr));
    missing.push_back(std::move(mr));
  }
  json doc = {{"fingerprint", data.fingerprint},
              {"schema", schema},
              {"classes", ds.class_names()},
              {"labels", ds.labels_for_export()},
              {"values", values},
              {"missing", missing},
              {"split",
               {{"train", indices(data.split.train)},
                {"test", indices(data.split.test)},
                {"validation", indices(data.split.validation)}}}};
  auto out = open_out(path);
  out << doc.dump() << "\n";
}

PreparedData read_prepared(const std::filesystem::path& path) {
  auto in = open_in(path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed dataset file " + path.string() + ": " + e.what());
  }
  std::vector<ColumnSchema> schema;
  for (const auto& c : doc.at("schema")) {
    ColumnSchema col;
    col.name = c.at("name").get<std::string>();
    col.kind = parse_column_kind(c.at("kind").get<std::string>());
    col.cardinality = c.at("cardinality").get<int>();
    col.levels = c.at("levels").get<std::vector<std::string>>();
    col.mean = c.at("mean").get<double>();
    col.std = c.at("std").get<double>();
    col.standardized = c.at("standardized").get<bool>();
    schema.push_back(std::move(col));
  }
  const auto& rows = doc.at("values");
  const auto& miss = doc.at("missing");
  const auto n = static_cast<Index>(rows.size());
  const auto cols = static_cast<Index>(schema.size());
  CellArray values(n, cols);
  MaskArray missing(n, cols);
  for (Index r = 0; r < n; ++r) {
    const auto& vr = rows[static_cast<std::size_t>(r)];
    const auto& mr = miss.at(static_cast<std::size_t>(r));
    if (static_cast<Index>(vr.size()) != cols || static_cast<Index>(mr.size()) != cols) {
      throw std::runtime_error("dataset file row " + std::to_string(r) + " has wrong width");
    }
    for (Index c = 0; c < cols; ++c) {
      values(r, c) = vr[static_cast<std::size_t>(c)].get<double>();
      missing(r, c) = mr[static_cast<std::size_t>(c)].get<int>() != 0;
    }
  }
  PreparedData out{TabularDataset(std::move(schema), std::move(values), std::move(missing),
                                  doc.at("labels").get<std::vector<int>>(),
                                  doc.at("classes").get<std::vector<std::string>>()),
                   {},
                   doc.at("fingerprint").get<std::uint64_t>()};
  const auto& sp = doc.at("split");
  out.split.train = indices(sp.at("train"));
  out.split.test = indices(sp.at("test"));
  out.split.validation = indices(sp.at("validation"));
  return out;
}

void write_bags(const std::filesystem::path& path, const BagSets& bags, std::uint64_t fingerprint) {
  auto out = open_out(path);
  out << json{{"fingerprint", fingerprint}}.dump() << "\n";
  for (const auto& [split, list] : bags) {
    for (std::size_t k = 0; k < list.size(); ++k) {
      std::vector<double> p(list[k].proportion.entries.data(),
                            list[k].proportion.entries.data() + list[k].proportion.entries.size());
      out << json{{"bag_id", k}, {"split", split}, {"members", indices(list[k].members)}, {"proportion", p}}.dump()
          << "\n";
    }
  }
}

BagSets read_bags(const std::filesystem::path& path, std::uint64_t* fingerprint) {
  auto in = open_in(path);
  BagSets out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception&) {
      throw std::runtime_error("malformed bag record at line " + std::to_string(line_no));
    }
    if (rec.contains("fingerprint") && !rec.contains("bag_id")) {
      if (fingerprint) *fingerprint = rec.at("fingerprint").get<std::uint64_t>();
      continue;
    }
    Bag bag;
    bag.members = indices(rec.at("members"));
    const auto p = rec.at("proportion").get<std::vector<double>>();
    bag.proportion.entries = Eigen::Map<const Eigen::RowVectorXd>(p.data(), static_cast<Index>(p.size()));
    bag.proportion.validate();
    auto& list = out[rec.at("split").get<std::string>()];
    if (rec.at("bag_id").get<std::size_t>() != list.size()) {
      throw std::runtime_error("bag records out of order at line " + std::to_string(line_no));
    }
    list.push_back(std::move(bag));
  }
  return out;
}

void write_schema_report(std::ostream& out, const TabularDataset& dataset) {
  out << "rows " << dataset.rows() << ", classes " << dataset.num_classes() << "\n";
  out << std::left << std::setw(20) << "column" << std::setw(13) << "kind" << std::setw(13) << "cardinality"
      << "missing\n";
  for (Index c = 0; c < dataset.cols(); ++c) {
    const auto& col = dataset.schema()[static_cast<std::size_t>(c)];
    out << std::setw(20) << col.name << std::setw(13) << to_string(col.kind) << std::setw(13)
        << (col.is_categorical() ? std::to_string(col.cardinality) : "-") << dataset.missing().col(c).count()
        << "\n";
  }
}

}  // namespace tabllp::data
