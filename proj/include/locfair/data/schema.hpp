#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace locfair::data {

enum class ColumnKind { kDiscrete, kContinuous, kIgnore };

/// How a raw column value becomes a binary outcome. Exactly one of the
/// alternatives is set:
///   positive_values  - listed values map to the positive outcome
///   range            - numeric value in [lo, hi] is positive
///   threshold        - numeric value >= threshold is positive
///   percentile       - threshold resolved at encoder fit time from the
///                      training split (e.g. 70 for the 70th percentile)
/// `invert` flips the outcome (for "below the threshold" rules).
struct BinaryRule {
  std::string column;
  std::vector<std::string> positive_values;
  std::optional<std::pair<double, double>> range;
  std::optional<double> threshold;
  std::optional<double> percentile;
  bool invert = false;

  bool is_numeric() const { return range || threshold || percentile; }
};

/// Declarative description of a delimiter-separated tabular file.
struct DatasetSchema {
  std::string name;
  char delimiter = ',';
  std::vector<std::string> missing_tokens = {"?", ""};
  /// Explicit column kinds; features keep the file's column order. Columns
  /// the schema does not list take `default_kind`.
  std::map<std::string, ColumnKind> kinds;
  ColumnKind default_kind = ColumnKind::kIgnore;
  BinaryRule label;      // positive -> y = +1, else -1
  BinaryRule sensitive;  // positive -> a = 1 (advantaged group), else 0
  bool sensitive_as_feature = true;
  /// Reserved: "minmax" is the only continuous encoding implemented.
  std::string continuous_encoding = "minmax";

  /// Throws SchemaError when label/sensitive columns are unlisted or the
  /// rules are malformed.
  void validate() const;
  ColumnKind kind_of(const std::string& column) const;
};

DatasetSchema schema_from_json(const nlohmann::json& j);
nlohmann::json schema_to_json(const DatasetSchema& schema);
DatasetSchema load_schema(const std::filesystem::path& path);

/// Built-in schemas: "adult", "compas", "bank", "communities".
std::vector<std::string> preset_names();
/// Throws ConfigError for unknown names.
DatasetSchema preset_schema(std::string_view name);

}  // namespace locfair::data
