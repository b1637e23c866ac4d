#include "locfair/data/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "locfair/error.hpp"

namespace locfair::data {

namespace {

BinaryRule resolve(const BinaryRule& rule, const Table& train) {
  BinaryRule r = rule;
  if (r.percentile) {
    const std::size_t col = train.column_index(r.column);
    std::vector<double> values;
    values.reserve(train.size());
    for (const auto& row : train.rows) values.push_back(*parse_number(row[col]));
    r.threshold = percentile(std::move(values), *r.percentile);
    r.percentile.reset();
  }
  return r;
}

}  // namespace

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw SchemaError("percentile: no values");
  std::sort(values.begin(), values.end());
  const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

bool rule_positive(const BinaryRule& rule, const std::string& cell) {
  bool positive = false;
  if (!rule.positive_values.empty()) {
    positive = std::find(rule.positive_values.begin(), rule.positive_values.end(), cell) !=
               rule.positive_values.end();
  } else {
    if (rule.percentile) {
      throw SchemaError(fmt::format("rule on '{}': percentile not resolved", rule.column));
    }
    const auto v = parse_number(cell);
    if (!v) throw SchemaError(fmt::format("rule on '{}': '{}' is not numeric", rule.column, cell));
    if (rule.range) {
      positive = *v >= rule.range->first && *v <= rule.range->second;
    } else {
      positive = *v >= *rule.threshold;
    }
  }
  return rule.invert ? !positive : positive;
}

EncoderMetadata fit_encoder(const Table& train, const DatasetSchema& schema) {
  if (train.rows.empty()) throw SchemaError("fit_encoder: empty training table");
  EncoderMetadata meta;
  meta.label = resolve(schema.label, train);
  meta.sensitive = resolve(schema.sensitive, train);
  std::size_t offset = 0;
  for (std::size_t c = 0; c < train.columns.size(); ++c) {
    const std::string& name = train.columns[c];
    if (name == schema.label.column) continue;
    if (name == schema.sensitive.column && !schema.sensitive_as_feature) continue;
    FeatureColumn fc;
    fc.name = name;
    fc.kind = schema.kind_of(name);
    if (fc.kind == ColumnKind::kIgnore) {
      // The sensitive column with no explicit kind is used as a 0/1 feature.
      fc.kind = ColumnKind::kDiscrete;
    }
    fc.offset = offset;
    if (fc.kind == ColumnKind::kDiscrete) {
      std::set<std::string> cats;
      for (const auto& row : train.rows) cats.insert(row[c]);
      fc.categories.assign(cats.begin(), cats.end());
      fc.width = fc.categories.size();
    } else {
      fc.min = fc.max = *parse_number(train.rows.front()[c]);
      for (const auto& row : train.rows) {
        const double v = *parse_number(row[c]);
        fc.min = std::min(fc.min, v);
        fc.max = std::max(fc.max, v);
      }
      fc.width = 1;
    }
    offset += fc.width;
    meta.features.push_back(std::move(fc));
  }
  meta.input_dim = offset;
  if (meta.input_dim == 0) throw SchemaError("fit_encoder: schema selects no feature columns");
  return meta;
}

EncodedDataset encode(const Table& table, const EncoderMetadata& meta) {
  EncodedDataset out;
  out.columns = meta.features;
  out.x = Matrix(table.size(), meta.input_dim);
  out.y.resize(table.size());
  out.a.resize(table.size());
  std::vector<std::size_t> src;
  for (const auto& fc : meta.features) src.push_back(table.column_index(fc.name));
  const std::size_t label_col = table.column_index(meta.label.column);
  const std::size_t sens_col = table.column_index(meta.sensitive.column);

  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& row = table.rows[i];
    auto xr = out.x.row(i);
    for (std::size_t f = 0; f < meta.features.size(); ++f) {
      const FeatureColumn& fc = meta.features[f];
      const std::string& cell = row[src[f]];
      if (fc.kind == ColumnKind::kDiscrete) {
        auto it = std::lower_bound(fc.categories.begin(), fc.categories.end(), cell);
        if (it != fc.categories.end() && *it == cell) {
          xr[fc.offset + static_cast<std::size_t>(it - fc.categories.begin())] = 1.0;
        } else {
          ++out.unseen_categories;
        }
      } else {
        const double v = *parse_number(cell);
        const double span = fc.max - fc.min;
        const double scaled = span > 0.0 ? (v - fc.min) / span : 0.0;
        xr[fc.offset] = std::clamp(scaled, 0.0, 1.0);
      }
    }
    out.y[i] = rule_positive(meta.label, row[label_col]) ? 1 : -1;
    out.a[i] = rule_positive(meta.sensitive, row[sens_col]) ? 1 : 0;
  }
  return out;
}

EncodedDataset take_rows(const EncodedDataset& data, std::span<const std::size_t> indices) {
  EncodedDataset out;
  out.columns = data.columns;
  out.x = Matrix(indices.size(), data.x.cols);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    if (i >= data.size()) {
      throw Error(fmt::format("take_rows: index {} outside {} rows", i, data.size()));
    }
    std::copy_n(data.x.row(i).data(), data.x.cols, out.x.row(k).data());
    out.y.push_back(data.y[i]);
    out.a.push_back(data.a[i]);
  }
  return out;
}

std::string decode_category(const EncodedDataset& data, std::size_t row,
                            const FeatureColumn& column) {
  if (column.kind != ColumnKind::kDiscrete) {
    throw Error(fmt::format("decode_category: '{}' is not discrete", column.name));
  }
  const auto xr = data.x.row(row);
  std::size_t best = column.width;
  double best_v = 0.0;
  for (std::size_t k = 0; k < column.width; ++k) {
    if (xr[column.offset + k] > best_v) {
      best_v = xr[column.offset + k];
      best = k;
    }
  }
  return best == column.width ? std::string() : column.categories[best];
}

nlohmann::json metadata_to_json(const EncoderMetadata& meta) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& fc : meta.features) {
    nlohmann::json c;
    c["name"] = fc.name;
    c["offset"] = fc.offset;
    c["width"] = fc.width;
    if (fc.kind == ColumnKind::kDiscrete) {
      c["categories"] = fc.categories;
    } else {
      c["min"] = fc.min;
      c["max"] = fc.max;
    }
    cols.push_back(std::move(c));
  }
  return {{"input_dim", meta.input_dim}, {"features", cols}};
}

}  // namespace locfair::data
