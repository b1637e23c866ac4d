#include "locfair/data/table.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/format.h>

#include "locfair/error.hpp"

namespace locfair::data {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::size_t Table::column_index(std::string_view name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw SchemaError(fmt::format("table: no column '{}'", name));
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<std::string> split_line(std::string_view line, char delimiter) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && trim(cur).empty()) {
      cur.clear();
      quoted = true;
    } else if (c == delimiter) {
      out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.emplace_back(trim(cur));
  return out;
}

std::optional<double> parse_number(std::string_view text) {
  const std::string s(trim(text));
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) return std::nullopt;
  return v;
}

Table parse_tabular(std::string_view text, const DatasetSchema& schema) {
  schema.validate();
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("table: input is empty (no header row)");
  const auto header = split_line(line, schema.delimiter);

  auto has = [&](const std::string& name) {
    return std::find(header.begin(), header.end(), name) != header.end();
  };
  if (!has(schema.label.column)) {
    throw SchemaError(fmt::format("table: header lacks label column '{}'", schema.label.column));
  }
  if (!has(schema.sensitive.column)) {
    throw SchemaError(
        fmt::format("table: header lacks sensitive column '{}'", schema.sensitive.column));
  }
  for (const auto& [name, kind] : schema.kinds) {
    if (kind != ColumnKind::kIgnore && !has(name)) {
      throw SchemaError(fmt::format("table: header lacks schema column '{}'", name));
    }
  }

  // Columns kept, with whether each must parse as a number.
  std::vector<std::size_t> keep;
  std::vector<bool> numeric;
  Table table;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    const bool is_label = name == schema.label.column;
    const bool is_sensitive = name == schema.sensitive.column;
    const ColumnKind kind = schema.kind_of(name);
    if (!is_label && !is_sensitive && kind == ColumnKind::kIgnore) continue;
    if (std::find(table.columns.begin(), table.columns.end(), name) != table.columns.end()) {
      throw SchemaError(fmt::format("table: duplicate header column '{}'", name));
    }
    bool num = false;
    if (is_label) num = schema.label.is_numeric();
    if (is_sensitive) num = num || schema.sensitive.is_numeric();
    if (!is_label && kind == ColumnKind::kContinuous &&
        (!is_sensitive || schema.sensitive_as_feature)) {
      num = true;
    }
    keep.push_back(c);
    numeric.push_back(num);
    table.columns.push_back(name);
  }

  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_line(line, schema.delimiter);
    bool ok = cells.size() == header.size();
    std::vector<std::string> row;
    for (std::size_t k = 0; ok && k < keep.size(); ++k) {
      const std::string& cell = cells[keep[k]];
      if (std::find(schema.missing_tokens.begin(), schema.missing_tokens.end(), cell) !=
          schema.missing_tokens.end()) {
        ok = false;
      } else if (numeric[k] && !parse_number(cell)) {
        ok = false;
      } else {
        row.push_back(cell);
      }
    }
    if (ok) {
      table.rows.push_back(std::move(row));
    } else {
      ++table.dropped_rows;
    }
  }
  if (table.rows.empty()) {
    throw SchemaError(fmt::format("table: no usable rows ({} dropped)", table.dropped_rows));
  }
  return table;
}

Table load_tabular(const std::filesystem::path& csv_path, const DatasetSchema& schema) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw IoError("table: cannot open " + csv_path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_tabular(text, schema);
}

Table take_rows(const Table& table, std::span<const std::size_t> indices) {
  Table out;
  out.columns = table.columns;
  out.rows.reserve(indices.size());
  for (std::size_t i : indices) out.rows.push_back(table.rows.at(i));
  return out;
}

}  // namespace locfair::data
