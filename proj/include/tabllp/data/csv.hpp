// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tabllp/data/dataset.hpp"

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace tabllp::data {

struct ColumnDecl {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
};

struct SchemaDeclaration {
  std::vector<ColumnDecl> columns;
  std::string label_column;

  /// Parses "name:kind,name:kind,..." (kind is numeric|categorical).
  static SchemaDeclaration parse(const std::string& columns, std::string label_column);
};

/// Reads a headered CSV. Empty cells and "?" are missing; numeric missing
/// cells hold 0. Categorical levels get dense indices by first
/// appearance. Class indices follow the sorted distinct label strings.
/// Throws std::runtime_error on an empty file, a malformed row (with its
/// line number) or a declared column/label absent from the header.
TabularDataset ingest_csv(const std::filesystem::path& path, const SchemaDeclaration& decl);
TabularDataset ingest_csv(std::istream& in, const SchemaDeclaration& decl);

/// Splits one CSV line honouring double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace tabllp::data
