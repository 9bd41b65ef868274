// SPDX-License-Identifier: Apache-2.0
#include "tabllp/data/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace tabllp::data {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool is_missing_cell(const std::string& cell) { return cell.empty() || cell == "?"; }

bool parse_double(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

SchemaDeclaration SchemaDeclaration::parse(const std::string& columns, std::string label_column) {
  SchemaDeclaration decl;
  decl.label_column = std::move(label_column);
  std::stringstream ss(columns);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto colon = item.rfind(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("schema entry '" + item + "' must be name:kind");
    }
    decl.columns.push_back({trim(item.substr(0, colon)), parse_column_kind(trim(item.substr(colon + 1)))});
  }
  if (decl.columns.empty()) throw std::invalid_argument("schema declares no columns");
  return decl;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

TabularDataset ingest_csv(const std::filesystem::path& path, const SchemaDeclaration& decl) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return ingest_csv(in, decl);
}

TabularDataset ingest_csv(std::istream& in, const SchemaDeclaration& decl) {
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw std::runtime_error("no rows");
  const auto header = split_csv_line(line);

  auto find_col = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw std::runtime_error("column '" + name + "' not found in CSV header");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t label_pos = find_col(decl.label_column);
  std::vector<std::size_t> positions;
  for (const auto& c : decl.columns) positions.push_back(find_col(c.name));

  const auto ncols = static_cast<Index>(decl.columns.size());
  std::vector<ColumnSchema> schema(decl.columns.size());
  std::vector<std::unordered_map<std::string, int>> level_maps(decl.columns.size());
  for (std::size_t j = 0; j < decl.columns.size(); ++j) {
    schema[j].name = decl.columns[j].name;
    schema[j].kind = decl.columns[j].kind;
  }

  std::vector<std::vector<double>> values;
  std::vector<std::vector<bool>> missing;
  std::vector<std::string> raw_labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("malformed row at line " + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size()) + " fields, got " +
                               std::to_string(cells.size()));
    }
    std::vector<double> row(decl.columns.size(), 0.0);
    std::vector<bool> miss(decl.columns.size(), false);
    for (std::size_t j = 0; j < decl.columns.size(); ++j) {
      const auto& cell = cells[positions[j]];
      if (is_missing_cell(cell)) {
        miss[j] = true;
        continue;
      }
      if (schema[j].is_categorical()) {
        auto [it, inserted] = level_maps[j].try_emplace(cell, static_cast<int>(schema[j].levels.size()));
        if (inserted) schema[j].levels.push_back(cell);
        row[j] = it->second;
      } else if (!parse_double(cell, row[j])) {
        throw std::runtime_error("malformed row at line " + std::to_string(line_no) + ": '" + cell +
                                 "' is not numeric in column '" + schema[j].name + "'");
      }
    }
    const auto& label = cells[label_pos];
    if (is_missing_cell(label)) {
      throw std::runtime_error("malformed row at line " + std::to_string(line_no) + ": missing label");
    }
    values.push_back(std::move(row));
    missing.push_back(std::move(miss));
    raw_labels.push_back(label);
  }
  if (values.empty()) throw std::runtime_error("no rows");

  for (auto& col : schema) col.cardinality = static_cast<int>(col.levels.size());

  std::map<std::string, int> classes;
  for (const auto& l : raw_labels) classes.emplace(l, 0);
  std::vector<std::string> class_names;
  for (auto& [name, idx] : classes) {
    idx = static_cast<int>(class_names.size());
    class_names.push_back(name);
  }

  const auto nrows = static_cast<Index>(values.size());
  CellArray cells(nrows, ncols);
  MaskArray mask(nrows, ncols);
  std::vector<int> labels(values.size());
  for (Index i = 0; i < nrows; ++i) {
    for (Index j = 0; j < ncols; ++j) {
      cells(i, j) = values[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      mask(i, j) = missing[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    labels[static_cast<std::size_t>(i)] = classes.at(raw_labels[static_cast<std::size_t>(i)]);
  }
  return TabularDataset(std::move(schema), std::move(cells), std::move(mask), std::move(labels),
                        std::move(class_names));
}

}  // namespace tabllp::data
