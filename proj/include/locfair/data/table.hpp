#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "locfair/data/schema.hpp"

namespace locfair::data {

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
};

/// Raw rows restricted to the columns the schema uses (features, label and
/// sensitive column), in file order. Cells are trimmed text; every numeric
/// cell has already been checked to parse.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::size_t dropped_rows = 0;

  std::size_t column_index(std::string_view name) const;
  std::size_t size() const { return rows.size(); }
};

/// Parses delimiter-separated text with a header row. Rows with missing tokens
/// or unparseable numeric values in a used column are dropped and counted.
/// Throws SchemaError for absent schema columns and for an empty result.
Table parse_tabular(std::string_view text, const DatasetSchema& schema);
Table load_tabular(const std::filesystem::path& csv_path, const DatasetSchema& schema);

Table take_rows(const Table& table, std::span<const std::size_t> indices);

/// Splits one line on the delimiter, honoring double-quoted fields, and trims
/// surrounding whitespace from every field.
std::vector<std::string> split_line(std::string_view line, char delimiter);

/// Strict full-string parse; nullopt on any trailing garbage.
std::optional<double> parse_number(std::string_view text);

}  // namespace locfair::data
