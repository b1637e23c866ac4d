#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "locfair/metrics/metrics.hpp"

namespace locfair::metrics {

/// One line of a results file: a single fold, or the fold aggregate
/// (fold = "mean") carrying standard errors.
struct ResultRow {
  std::string run_id;
  std::string dataset;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  std::size_t k = 0;
  std::string fold;
  std::optional<double> accuracy_y, di, eo, leakage_a;
  std::optional<double> accuracy_y_stderr, di_stderr, eo_stderr, leakage_a_stderr;
};

enum class MetricSelection { kAll, kDi, kEo };

MetricSelection parse_metric_selection(const std::string& name);

struct RunIdentity {
  std::string run_id;
  std::string dataset;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  std::size_t k = 0;
};

/// Per-fold rows followed by the aggregate row.
std::vector<ResultRow> report_rows(const RunIdentity& id, const FairnessReport& report);

/// CSV text: "# config: <json>" line, header, rows. Undefined values are
/// written as NA; reals with 6 decimals.
std::string format_results(const std::vector<ResultRow>& rows, const std::string& config_json,
                           MetricSelection selection = MetricSelection::kAll);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace locfair::metrics
