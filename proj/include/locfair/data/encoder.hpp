#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "locfair/data/schema.hpp"
#include "locfair/data/table.hpp"

namespace locfair::data {

/// One source column's slice of the encoded feature vector.
struct FeatureColumn {
  std::string name;
  ColumnKind kind = ColumnKind::kContinuous;
  std::size_t offset = 0;
  std::size_t width = 1;
  std::vector<std::string> categories;  // discrete only, sorted
  double min = 0.0;                     // continuous only
  double max = 0.0;
};

/// Frozen statistics of the training split. Percentile rules are resolved to
/// concrete thresholds here, so encoding never reads test statistics.
struct EncoderMetadata {
  std::vector<FeatureColumn> features;
  BinaryRule label;
  BinaryRule sensitive;
  std::size_t input_dim = 0;
};

/// X in model space, y in {-1, +1}, a in {0, 1}.
struct EncodedDataset {
  Matrix x;
  std::vector<int> y;
  std::vector<int> a;
  std::vector<FeatureColumn> columns;
  std::size_t unseen_categories = 0;

  std::size_t size() const { return y.size(); }
  std::size_t input_dim() const { return x.cols; }
};

EncoderMetadata fit_encoder(const Table& train, const DatasetSchema& schema);
/// One-hot for discrete columns (unseen categories become an all-zero group
/// and are counted), min-max to [0, 1] with clamping for continuous ones.
EncodedDataset encode(const Table& table, const EncoderMetadata& meta);

EncodedDataset take_rows(const EncodedDataset& data, std::span<const std::size_t> indices);

/// Recovers the category of a discrete column from its one-hot group (argmax);
/// empty string for an all-zero group.
std::string decode_category(const EncodedDataset& data, std::size_t row,
                            const FeatureColumn& column);

/// Linear-interpolation percentile (p in [0, 100]) of unsorted values.
double percentile(std::vector<double> values, double p);

/// Applies a resolved rule to one cell; throws SchemaError for an unresolved
/// percentile rule or a non-numeric value under a numeric rule.
bool rule_positive(const BinaryRule& rule, const std::string& cell);

nlohmann::json metadata_to_json(const EncoderMetadata& meta);

}  // namespace locfair::data
