#include "locfair/cli/cli.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "locfair/data/synthetic.hpp"
#include "locfair/error.hpp"
#include "locfair/metrics/report_io.hpp"
#include "locfair/nn/bundle.hpp"
#include "locfair/train/pipeline.hpp"

namespace locfair::cli {

namespace fs = std::filesystem;

namespace {

/// Raised for bad flag combinations; maps to the usage exit code.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string dataset = "synthetic";
  std::string schema;
  std::string csv;
  double test_fraction = 0.2;
  std::size_t n_train = 1000;
  std::size_t n_test = 500;
  std::size_t dim = 25;
  double p_bias = 0.5;
  double p_bias_test = 0.0;

  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double lambda3 = 0.1;
  std::size_t k = 4;
  int epochs = 100;
  std::size_t batch_size = 64;
  int d_steps = 20;
  int finetune_epochs = 100;
  int probe_epochs = 100;
  std::size_t folds = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> preset;
  std::string out;

  // sweep
  std::string sweep;
  std::vector<double> values;
  unsigned jobs = 1;
  std::string plot_metric = "di";

  // eval
  std::string checkpoint;
  std::string run_dir;
  std::string metric = "all";

  // gen-adult
  std::size_t rows = 5000;
};

struct Flags {
  CLI::Option* lambda1 = nullptr;
  CLI::Option* lambda2 = nullptr;
  CLI::Option* lambda3 = nullptr;
  CLI::Option* dataset = nullptr;
  CLI::Option* schema = nullptr;
  CLI::Option* csv = nullptr;
  CLI::Option* dim = nullptr;
  CLI::Option* p_bias_test = nullptr;
};

void add_dataset_flags(CLI::App* app, Options& o, Flags& f) {
  f.dataset = app->add_option("--dataset", o.dataset,
                              "synthetic, a preset (adult, compas, bank, communities) or a name "
                              "for --schema data");
  f.schema = app->add_option("--schema", o.schema, "JSON schema file for a custom dataset");
  f.csv = app->add_option("--csv", o.csv, "Delimited data file");
  app->add_option("--test-fraction", o.test_fraction, "Held-out share when --folds is 1");
  app->add_option("--n-train", o.n_train, "Synthetic training rows");
  app->add_option("--n-test", o.n_test, "Synthetic test rows");
  f.dim = app->add_option("--dim", o.dim, "Synthetic d (features are 2d + 1)");
  app->add_option("--p-bias", o.p_bias, "Synthetic training-set bias");
  f.p_bias_test = app->add_option("--p-bias-test", o.p_bias_test, "Synthetic test-set bias");
}

void add_train_flags(CLI::App* app, Options& o, Flags& f) {
  f.lambda1 = app->add_option("--lambda1", o.lambda1, "Weight of the adversarial term");
  f.lambda2 = app->add_option("--lambda2", o.lambda2, "Weight of the local fairness term");
  f.lambda3 = app->add_option("--lambda3", o.lambda3, "Weight of the label term (0 disables it)");
  app->add_option("--K", o.k, "Neighbours per row in the local fairness term");
  app->add_option("--epochs", o.epochs, "Epochs of steps I and II");
  app->add_option("--batch-size", o.batch_size);
  app->add_option("--d-steps", o.d_steps, "Discriminator updates per generator update");
  app->add_option("--finetune-epochs", o.finetune_epochs);
  app->add_option("--probe-epochs", o.probe_epochs);
  app->add_option("--folds,--seeds", o.folds,
                  "Folds (tabular) or independent seeds (synthetic)");
  app->add_option("--seed", o.seed);
  app->add_option("--preset", o.preset, "Loss toggles preset, e.g. --preset ablation-row 12")
      ->expected(2);
}

fs::path output_dir(const Options& o, const std::string& fallback) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv(kOutEnv); env && *env) return fs::path(env) / fallback;
  return fs::path("locfair-out") / fallback;
}

train::DatasetSpec dataset_spec(const Options& o) {
  train::DatasetSpec spec;
  spec.name = o.dataset;
  if (o.schema.empty() && o.dataset == "synthetic") {
    data::SyntheticConfig s;
    s.n_train = o.n_train;
    s.n_test = o.n_test;
    s.d = o.dim;
    s.p_bias_train = o.p_bias;
    s.p_bias_test = o.p_bias_test;
    spec.synthetic = s;
    return spec;
  }
  if (!o.schema.empty()) {
    spec.schema = data::load_schema(o.schema);
    if (o.dataset == "synthetic") spec.name = spec.schema->name;
  } else {
    spec.schema = data::preset_schema(o.dataset);
  }
  if (o.csv.empty()) {
    throw UsageError(fmt::format("dataset '{}' needs --csv <path>", spec.name));
  }
  spec.csv = o.csv;
  spec.test_fraction = o.test_fraction;
  return spec;
}

void set_lambda3(losses::LossWeights& w, double v) {
  w.lambda3 = v;
  w.use_y = v > 0.0;
}

train::TrainConfig train_config(const Options& o, const Flags& f) {
  train::TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch_size;
  cfg.d_steps = o.d_steps;
  cfg.k = o.k;
  cfg.seed = o.seed;
  cfg.finetune_epochs = o.finetune_epochs;
  cfg.probe_epochs = o.probe_epochs;
  if (!o.preset.empty()) {
    if (o.preset.size() != 2 || o.preset[0] != "ablation-row") {
      throw UsageError("--preset expects: ablation-row <1-16>");
    }
    int row = 0;
    try {
      row = std::stoi(o.preset[1]);
    } catch (const std::exception&) {
      throw UsageError(fmt::format("--preset ablation-row: '{}' is not a row number",
                                   o.preset[1]));
    }
    cfg.weights = train::ablation_row(row);
  } else {
    set_lambda3(cfg.weights, o.lambda3);
  }
  cfg.weights.lambda1 = o.lambda1;
  cfg.weights.lambda2 = o.lambda2;
  if (f.lambda3->count() > 0) set_lambda3(cfg.weights, o.lambda3);
  cfg.validate();
  return cfg;
}

std::string report_text(const train::PipelineResult& r, const std::string& run_id,
                        const std::string& dataset, const train::TrainConfig& cfg,
                        metrics::MetricSelection sel) {
  const metrics::RunIdentity id{run_id,
                                dataset,
                                cfg.weights.lambda1,
                                cfg.weights.lambda2,
                                cfg.weights.lambda3,
                                cfg.k};
  return metrics::format_results(metrics::report_rows(id, r.report), r.config.dump(), sel);
}

int cmd_train(const Options& o, const Flags& f, std::ostream& out, std::ostream& err) {
  const auto spec = dataset_spec(o);
  const auto cfg = train_config(o, f);
  const auto dir = output_dir(o, "train");
  err << fmt::format("training on {} ({} fold(s)), output in {}\n", spec.name, o.folds,
                     dir.string());
  const auto result = train::run_pipeline(spec, cfg, o.folds, dir, "train");
  out << report_text(result, "train", spec.name, cfg, metrics::MetricSelection::kAll);
  return kExitOk;
}

struct Cell {
  std::string label;
  double value = 0.0;
  train::DatasetSpec spec;
  train::TrainConfig cfg;
  std::optional<train::PipelineResult> result;
  std::string error;
};

std::vector<double> default_values(const std::string& axis) {
  if (axis == "lambda3") return {0.0, 0.1, 0.2, 0.5, 0.75, 1.0};
  if (axis == "K") return {2, 4, 8, 16};
  if (axis == "bias") return {0.25, 0.5, 0.75};
  std::vector<double> rows;
  for (int r = 1; r <= train::kAblationRows; ++r) rows.push_back(r);
  return rows;
}

std::vector<Cell> plan_cells(const Options& o, const Flags& f) {
  const auto spec = dataset_spec(o);
  const auto base = train_config(o, f);
  if (o.sweep == "bias" && !spec.is_synthetic()) {
    throw UsageError("--sweep bias applies to the synthetic dataset only");
  }
  const auto values = o.values.empty() ? default_values(o.sweep) : o.values;
  std::vector<Cell> cells;
  for (double v : values) {
    Cell c;
    c.value = v;
    c.spec = spec;
    c.cfg = base;
    if (o.sweep == "lambda3") {
      set_lambda3(c.cfg.weights, v);
    } else if (o.sweep == "K") {
      if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v))) {
        throw UsageError(fmt::format("K sweep value {} is not a positive integer", v));
      }
      c.cfg.k = static_cast<std::size_t>(v);
    } else if (o.sweep == "bias") {
      c.spec.synthetic->p_bias_train = v;
    } else {
      if (v != static_cast<double>(static_cast<int>(v))) {
        throw UsageError(fmt::format("ablation row {} is not an integer", v));
      }
      c.cfg.weights = train::ablation_row(static_cast<int>(v));
      c.cfg.weights.lambda1 = base.weights.lambda1;
      c.cfg.weights.lambda2 = base.weights.lambda2;
    }
    c.cfg.validate();
    c.spec.validate();
    c.label = fmt::format("{}={}", o.sweep == "ablation" ? "row" : o.sweep, v);
    cells.push_back(std::move(c));
  }
  return cells;
}

void run_cells(std::vector<Cell>& cells, std::size_t folds, const fs::path& dir, unsigned jobs,
               std::ostream& err) {
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      auto& c = cells[i];
      try {
        c.result = train::run_pipeline(c.spec, c.cfg, folds, dir / c.label, c.label);
      } catch (const std::exception& e) {
        c.error = e.what();
      }
      std::lock_guard lock(log_mutex);
      err << fmt::format("[{}/{}] {}: {}\n", i + 1, cells.size(), c.label,
                         c.error.empty() ? "done" : "FAILED: " + c.error);
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, cells.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

int cmd_sweep(const Options& o, const Flags& f, std::ostream& out, std::ostream& err) {
  const auto selection = metrics::parse_metric_selection(o.plot_metric);
  if (selection == metrics::MetricSelection::kAll) {
    throw UsageError("--plot-metric must be di or eo");
  }
  auto cells = plan_cells(o, f);
  const auto dir = output_dir(o, "sweep-" + o.sweep);
  err << fmt::format("sweep over {} ({} cells x {} fold(s)), output in {}\n", o.sweep,
                     cells.size(), o.folds, dir.string());
  fs::create_directories(dir);
  run_cells(cells, o.folds, dir, o.jobs, err);

  nlohmann::json config = {{"command", "sweep"},
                           {"axis", o.sweep},
                           {"values", nlohmann::json::array()},
                           {"base", train::effective_config(cells.front().spec,
                                                            train_config(o, f), o.folds)}};
  for (const auto& c : cells) config["values"].push_back(c.value);
  const std::string config_json = config.dump();

  std::vector<metrics::ResultRow> rows;
  std::string plot = "# config: " + config_json + "\n";
  const std::string y = o.plot_metric;
  plot += fmt::format("axis,value,accuracy_y,{0},accuracy_y_stderr,{0}_stderr\n", y);
  std::string status = "# config: " + config_json + "\ncell,status,message\n";
  bool failed = false;
  for (const auto& c : cells) {
    if (!c.result) {
      failed = true;
      std::string msg = c.error;
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      std::replace(msg.begin(), msg.end(), ',', ';');
      status += fmt::format("{},failed,{}\n", c.label, msg);
      continue;
    }
    status += fmt::format("{},ok,\n", c.label);
    const metrics::RunIdentity id{c.label,
                                  c.spec.name,
                                  c.cfg.weights.lambda1,
                                  c.cfg.weights.lambda2,
                                  c.cfg.weights.lambda3,
                                  c.cfg.k};
    auto cell_rows = metrics::report_rows(id, c.result->report);
    rows.insert(rows.end(), cell_rows.begin(), cell_rows.end());
    const auto& rep = c.result->report;
    const auto& metric = y == "di" ? rep.di : rep.eo;
    auto num = [](const std::optional<double>& v) {
      return v ? fmt::format("{:.6f}", *v) : std::string("NA");
    };
    plot += fmt::format("{},{},{},{},{},{}\n", o.sweep, c.value, num(rep.accuracy_y.mean),
                        num(metric.mean), num(rep.accuracy_y.stderr_mean),
                        num(metric.stderr_mean));
  }
  const auto results = metrics::format_results(rows, config_json);
  metrics::write_text_file(dir / "results.csv", results);
  metrics::write_text_file(dir / fmt::format("plot_{}.csv", y), plot);
  metrics::write_text_file(dir / "cells.csv", status);
  out << results;
  if (failed) {
    err << "one or more sweep cells failed; see " << (dir / "cells.csv").string() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

/// Dataset and fold count recorded in a checkpoint or run directory, with
/// command-line overrides applied.
train::DatasetSpec eval_dataset(const nlohmann::json& config, const Options& o, const Flags& f) {
  auto spec = train::dataset_spec_from_json(config.at("dataset"));
  if (f.dataset->count() > 0 || f.schema->count() > 0) {
    auto fresh = dataset_spec(o);
    fresh.test_fraction = spec.test_fraction;
    spec = fresh;
  } else if (f.csv->count() > 0) {
    spec.csv = o.csv;
  }
  if (spec.synthetic) {
    if (f.dim->count() > 0) spec.synthetic->d = o.dim;
    if (f.p_bias_test->count() > 0) spec.synthetic->p_bias_test = o.p_bias_test;
  }
  return spec;
}

nlohmann::json parse_config(const std::string& text, const std::string& where) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("{}: config is not valid JSON ({})", where, e.what()));
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_eval(const Options& o, const Flags& f, std::ostream& out, std::ostream& err) {
  const auto selection = metrics::parse_metric_selection(o.metric);
  if (o.checkpoint.empty() == o.run_dir.empty()) {
    throw UsageError("eval needs exactly one of --checkpoint or --run-dir");
  }
  std::vector<std::pair<std::size_t, fs::path>> checkpoints;
  nlohmann::json config;
  std::string where;
  if (!o.run_dir.empty()) {
    where = (fs::path(o.run_dir) / "config.json").string();
    config = parse_config(read_file(where), where);
    const auto folds = config.at("folds").get<std::size_t>();
    for (std::size_t i = 0; i < folds; ++i) {
      checkpoints.emplace_back(i, fs::path(o.run_dir) / fmt::format("fold{}", i) / "model.ckpt");
    }
  } else {
    where = o.checkpoint;
    const auto bundle = nn::load_bundle(o.checkpoint);
    config = parse_config(bundle.config_json, where);
    checkpoints.emplace_back(config.value("fold", std::size_t{0}), o.checkpoint);
  }
  train::DatasetSpec spec;
  train::TrainConfig cfg;
  std::size_t folds = 1;
  try {
    spec = eval_dataset(config, o, f);
    cfg = train::train_config_from_json(config.at("train"));
    folds = config.at("folds").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("{}: incomplete config ({})", where, e.what()));
  }
  const auto fold_data = train::prepare_folds(spec, cfg.seed, folds);
  std::vector<metrics::FoldMetrics> fold_metrics;
  for (const auto& [fold, path] : checkpoints) {
    if (fold >= fold_data.size()) {
      throw FormatError(fmt::format("{}: fold {} outside the {} recorded folds", path.string(),
                                    fold, fold_data.size()));
    }
    const auto bundle = nn::load_bundle(path);
    fold_metrics.push_back(train::evaluate_bundle(bundle, fold_data[fold].test, fold));
  }
  const auto report = metrics::FairnessReport::aggregate(std::move(fold_metrics));
  const metrics::RunIdentity id{config.value("run_id", std::string("eval")),
                                spec.name,
                                cfg.weights.lambda1,
                                cfg.weights.lambda2,
                                cfg.weights.lambda3,
                                cfg.k};
  const auto text =
      metrics::format_results(metrics::report_rows(id, report), config.dump(), selection);
  if (!o.out.empty()) {
    metrics::write_text_file(o.out, text);
    err << "report written to " << o.out << "\n";
  }
  out << text;
  return kExitOk;
}

int cmd_gen_adult(const Options& o, std::ostream& out, std::ostream& err) {
  const auto text = data::gen_adult_format_csv(o.rows, o.seed);
  if (o.out.empty()) {
    out << text;
  } else {
    metrics::write_text_file(o.out, text);
    err << fmt::format("{} rows written to {}\n", o.rows, o.out);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fair tabular representations: training, sweeps and evaluation", "locfair"};
  app.require_subcommand(1);
  Options o;
  Flags train_flags, sweep_flags, eval_flags;

  auto* train_cmd = app.add_subcommand("train", "Train on one dataset and report test metrics");
  add_dataset_flags(train_cmd, o, train_flags);
  add_train_flags(train_cmd, o, train_flags);
  train_cmd->add_option("--out", o.out, fmt::format("Output directory (default ${}/train)",
                                                     kOutEnv));

  auto* sweep_cmd = app.add_subcommand("sweep", "Run one experiment per value of a sweep axis");
  add_dataset_flags(sweep_cmd, o, sweep_flags);
  add_train_flags(sweep_cmd, o, sweep_flags);
  sweep_cmd->add_option("--sweep", o.sweep, "Axis to sweep")
      ->required()
      ->check(CLI::IsMember({"lambda3", "K", "bias", "ablation"}));
  sweep_cmd->add_option("--values", o.values, "Override the default grid")->delimiter(',');
  sweep_cmd->add_option("--jobs", o.jobs, "Cells run in parallel")
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--plot-metric", o.plot_metric, "y axis of the plot data")
      ->check(CLI::IsMember({"di", "eo"}));
  sweep_cmd->add_option("--out", o.out,
                        fmt::format("Output directory (default ${}/sweep-<axis>)", kOutEnv));

  auto* eval_cmd = app.add_subcommand("eval", "Recompute test metrics from stored models");
  add_dataset_flags(eval_cmd, o, eval_flags);
  eval_cmd->add_option("--checkpoint", o.checkpoint, "A single model.ckpt");
  eval_cmd->add_option("--run-dir", o.run_dir, "Output directory of a train run");
  eval_cmd->add_option("--metric", o.metric, "Columns to report")
      ->check(CLI::IsMember({"all", "di", "eo"}));
  eval_cmd->add_option("--out", o.out, "Also write the report to this file");

  auto* gen_cmd = app.add_subcommand("gen-adult", "Write an Adult-format CSV sample");
  gen_cmd->add_option("--rows", o.rows)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", o.seed);
  gen_cmd->add_option("--out", o.out, "Output file (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << "error: " << e.what() << "\n\n" << sub->help();
    return kExitUsage;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(o, train_flags, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(o, sweep_flags, out, err);
    if (eval_cmd->parsed()) return cmd_eval(o, eval_flags, out, err);
    return cmd_gen_adult(o, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace locfair::cli
