#include "locfair/metrics/report_io.hpp"

#include <fstream>

#include <fmt/format.h>

#include "locfair/error.hpp"

namespace locfair::metrics {

namespace {

std::string num(const std::optional<double>& v) {
  return v ? fmt::format("{:.6f}", *v) : std::string("NA");
}

}  // namespace

MetricSelection parse_metric_selection(const std::string& name) {
  if (name == "all") return MetricSelection::kAll;
  if (name == "di") return MetricSelection::kDi;
  if (name == "eo") return MetricSelection::kEo;
  throw ConfigError(fmt::format("unknown metric '{}' (expected all, di or eo)", name));
}

std::vector<ResultRow> report_rows(const RunIdentity& id, const FairnessReport& report) {
  std::vector<ResultRow> rows;
  auto base = [&] {
    ResultRow r;
    r.run_id = id.run_id;
    r.dataset = id.dataset;
    r.lambda1 = id.lambda1;
    r.lambda2 = id.lambda2;
    r.lambda3 = id.lambda3;
    r.k = id.k;
    return r;
  };
  for (const auto& f : report.folds) {
    ResultRow r = base();
    r.fold = std::to_string(f.fold);
    r.accuracy_y = f.accuracy_y;
    r.di = f.di;
    r.eo = f.eo;
    r.leakage_a = f.leakage_a;
    rows.push_back(std::move(r));
  }
  ResultRow m = base();
  m.fold = "mean";
  m.accuracy_y = report.accuracy_y.mean;
  m.di = report.di.mean;
  m.eo = report.eo.mean;
  m.leakage_a = report.leakage_a.mean;
  m.accuracy_y_stderr = report.accuracy_y.stderr_mean;
  m.di_stderr = report.di.stderr_mean;
  m.eo_stderr = report.eo.stderr_mean;
  m.leakage_a_stderr = report.leakage_a.stderr_mean;
  rows.push_back(std::move(m));
  return rows;
}

std::string format_results(const std::vector<ResultRow>& rows, const std::string& config_json,
                           MetricSelection selection) {
  const bool di = selection != MetricSelection::kEo;
  const bool eo = selection != MetricSelection::kDi;
  const bool leak = selection == MetricSelection::kAll;
  std::string out = "# config: " + config_json + "\n";
  out += "run_id,dataset,lambda1,lambda2,lambda3,K,fold,accuracy_y";
  if (di) out += ",di";
  if (eo) out += ",eo";
  if (leak) out += ",leakage_a";
  out += ",accuracy_y_stderr";
  if (di) out += ",di_stderr";
  if (eo) out += ",eo_stderr";
  if (leak) out += ",leakage_a_stderr";
  out += "\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}", r.run_id, r.dataset, r.lambda1, r.lambda2,
                       r.lambda3, r.k, r.fold, num(r.accuracy_y));
    if (di) out += "," + num(r.di);
    if (eo) out += "," + num(r.eo);
    if (leak) out += "," + num(r.leakage_a);
    out += "," + num(r.accuracy_y_stderr);
    if (di) out += "," + num(r.di_stderr);
    if (eo) out += "," + num(r.eo_stderr);
    if (leak) out += "," + num(r.leakage_a_stderr);
    out += "\n";
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace locfair::metrics
