#include "locfair/data/schema.hpp"

#include <fstream>

#include <fmt/format.h>

#include "locfair/error.hpp"

namespace locfair::data {

namespace {

using nlohmann::json;

ColumnKind kind_from_string(const std::string& s) {
  if (s == "discrete") return ColumnKind::kDiscrete;
  if (s == "continuous") return ColumnKind::kContinuous;
  if (s == "ignore") return ColumnKind::kIgnore;
  throw SchemaError(fmt::format("schema: unknown column kind '{}'", s));
}

std::string kind_to_string(ColumnKind k) {
  switch (k) {
    case ColumnKind::kDiscrete:
      return "discrete";
    case ColumnKind::kContinuous:
      return "continuous";
    case ColumnKind::kIgnore:
      return "ignore";
  }
  return "ignore";
}

BinaryRule rule_from_json(const json& j, const char* what) {
  if (!j.is_object() || !j.contains("column")) {
    throw SchemaError(fmt::format("schema: '{}' must be an object with a 'column'", what));
  }
  BinaryRule r;
  r.column = j.at("column").get<std::string>();
  if (j.contains("positive")) r.positive_values = j.at("positive").get<std::vector<std::string>>();
  if (j.contains("range")) {
    const auto v = j.at("range").get<std::vector<double>>();
    if (v.size() != 2) throw SchemaError(fmt::format("schema: '{}.range' needs [lo, hi]", what));
    r.range = std::pair{v[0], v[1]};
  }
  if (j.contains("threshold")) r.threshold = j.at("threshold").get<double>();
  if (j.contains("percentile")) r.percentile = j.at("percentile").get<double>();
  r.invert = j.value("invert", false);
  return r;
}

json rule_to_json(const BinaryRule& r) {
  json j;
  j["column"] = r.column;
  if (!r.positive_values.empty()) j["positive"] = r.positive_values;
  if (r.range) j["range"] = {r.range->first, r.range->second};
  if (r.threshold) j["threshold"] = *r.threshold;
  if (r.percentile) j["percentile"] = *r.percentile;
  if (r.invert) j["invert"] = true;
  return j;
}

void validate_rule(const BinaryRule& r, const char* what) {
  if (r.column.empty()) throw SchemaError(fmt::format("schema: {} column is not named", what));
  const int set = (r.positive_values.empty() ? 0 : 1) + (r.range ? 1 : 0) +
                  (r.threshold ? 1 : 0) + (r.percentile ? 1 : 0);
  if (set != 1) {
    throw SchemaError(fmt::format(
        "schema: {} rule must set exactly one of positive/range/threshold/percentile", what));
  }
  if (r.percentile && !(*r.percentile >= 0.0 && *r.percentile <= 100.0)) {
    throw SchemaError(fmt::format("schema: {} percentile {} outside [0, 100]", what,
                                  *r.percentile));
  }
  if (r.range && r.range->first > r.range->second) {
    throw SchemaError(fmt::format("schema: {} range is empty", what));
  }
}

}  // namespace

void DatasetSchema::validate() const {
  validate_rule(label, "label");
  validate_rule(sensitive, "sensitive");
  if (label.column == sensitive.column) {
    throw SchemaError("schema: label and sensitive column must differ");
  }
  if (continuous_encoding != "minmax") {
    throw SchemaError(fmt::format("schema: continuous encoding '{}' is not implemented",
                                  continuous_encoding));
  }
}

ColumnKind DatasetSchema::kind_of(const std::string& column) const {
  auto it = kinds.find(column);
  return it == kinds.end() ? default_kind : it->second;
}

DatasetSchema schema_from_json(const json& j) {
  DatasetSchema s;
  try {
    s.name = j.value("name", std::string("custom"));
    const std::string delim = j.value("delimiter", std::string(","));
    if (delim == "\\t" || delim == "tab") {
      s.delimiter = '\t';
    } else if (delim.size() == 1) {
      s.delimiter = delim[0];
    } else {
      throw SchemaError(fmt::format("schema: delimiter '{}' must be one character", delim));
    }
    if (j.contains("missing")) s.missing_tokens = j.at("missing").get<std::vector<std::string>>();
    for (const char* kind : {"discrete", "continuous", "ignore"}) {
      if (!j.contains(kind)) continue;
      for (const auto& col : j.at(kind).get<std::vector<std::string>>()) {
        if (!s.kinds.emplace(col, kind_from_string(kind)).second) {
          throw SchemaError(fmt::format("schema: column '{}' listed twice", col));
        }
      }
    }
    s.default_kind = kind_from_string(j.value("default_kind", std::string("ignore")));
    s.label = rule_from_json(j.at("label"), "label");
    s.sensitive = rule_from_json(j.at("sensitive"), "sensitive");
    s.sensitive_as_feature = j.value("sensitive_as_feature", true);
    s.continuous_encoding = j.value("continuous_encoding", std::string("minmax"));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("schema: ") + e.what());
  }
  s.validate();
  return s;
}

json schema_to_json(const DatasetSchema& s) {
  json j;
  j["name"] = s.name;
  j["delimiter"] = s.delimiter == '\t' ? std::string("tab") : std::string(1, s.delimiter);
  j["missing"] = s.missing_tokens;
  for (const char* kind : {"discrete", "continuous", "ignore"}) {
    std::vector<std::string> cols;
    for (const auto& [name, k] : s.kinds) {
      if (kind_to_string(k) == kind) cols.push_back(name);
    }
    if (!cols.empty()) j[kind] = cols;
  }
  j["default_kind"] = kind_to_string(s.default_kind);
  j["label"] = rule_to_json(s.label);
  j["sensitive"] = rule_to_json(s.sensitive);
  j["sensitive_as_feature"] = s.sensitive_as_feature;
  j["continuous_encoding"] = s.continuous_encoding;
  return j;
}

DatasetSchema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("schema: cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(fmt::format("schema: {}: {}", path.string(), e.what()));
  }
  return schema_from_json(j);
}

std::vector<std::string> preset_names() { return {"adult", "compas", "bank", "communities"}; }

DatasetSchema preset_schema(std::string_view name) {
  json j;
  if (name == "adult") {
    // UCI Adult with a header row; gender is the sensitive attribute.
    j = {{"name", "adult"},
         {"missing", {"?", ""}},
         {"continuous",
          {"age", "education-num", "capital-gain", "capital-loss", "hours-per-week"}},
         {"discrete",
          {"workclass", "education", "marital-status", "occupation", "relationship", "race",
           "sex", "native-country"}},
         {"ignore", {"fnlwgt"}},
         {"label", {{"column", "income"}, {"positive", {">50K", ">50K."}}}},
         {"sensitive", {{"column", "sex"}, {"positive", {"Male"}}}}};
  } else if (name == "compas") {
    // ProPublica two-year recidivism; twelve feature columns, race sensitive.
    j = {{"name", "compas"},
         {"continuous",
          {"age", "juv_fel_count", "juv_misd_count", "juv_other_count", "priors_count",
           "decile_score", "v_decile_score", "days_b_screening_arrest"}},
         {"discrete", {"sex", "age_cat", "race", "c_charge_degree"}},
         {"label", {{"column", "two_year_recid"}, {"positive", {"1"}}}},
         {"sensitive", {{"column", "race"}, {"positive", {"Caucasian"}}}}};
  } else if (name == "bank") {
    // bank-additional-full.csv; age binarized to [25, 60].
    j = {{"name", "bank"},
         {"delimiter", ";"},
         {"missing", {""}},
         {"continuous",
          {"age", "duration", "campaign", "pdays", "previous", "emp.var.rate", "cons.price.idx",
           "cons.conf.idx", "euribor3m", "nr.employed"}},
         {"discrete",
          {"job", "marital", "education", "default", "housing", "loan", "contact", "month",
           "day_of_week", "poutcome"}},
         {"label", {{"column", "y"}, {"positive", {"yes"}}}},
         {"sensitive", {{"column", "age"}, {"range", {25.0, 60.0}}}}};
  } else if (name == "communities") {
    // Communities and Crime with a header row; violent = top 30% of
    // ViolentCrimesPerPop. Communities below the median racepctblack are the
    // advantaged group.
    j = {{"name", "communities"},
         {"missing", {"?", ""}},
         {"default_kind", "continuous"},
         {"ignore", {"state", "county", "community", "communityname", "fold"}},
         {"label", {{"column", "ViolentCrimesPerPop"}, {"percentile", 70.0}}},
         {"sensitive", {{"column", "racepctblack"}, {"percentile", 50.0}, {"invert", true}}}};
  } else {
    throw ConfigError(fmt::format("unknown dataset preset '{}' (known: adult, compas, bank, "
                                  "communities)",
                                  name));
  }
  return schema_from_json(j);
}

}  // namespace locfair::data
