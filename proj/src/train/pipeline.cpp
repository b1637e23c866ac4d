#include "locfair/train/pipeline.hpp"

#include <fmt/format.h>

#include "locfair/data/splits.hpp"
#include "locfair/data/table.hpp"
#include "locfair/error.hpp"
#include "locfair/metrics/leakage.hpp"
#include "locfair/metrics/report_io.hpp"
#include "locfair/rng.hpp"
#include "locfair/train/trainer.hpp"

namespace locfair::train {

namespace {

enum Stream : std::uint64_t { kInit = 0, kStep1 = 1, kStep2 = 2, kFinetune = 3, kProbe = 4 };

std::pair<data::EncodedDataset, data::EncodedDataset> encode_split(
    const data::Table& table, const data::DatasetSchema& schema, const data::Split& split) {
  const auto train_rows = data::take_rows(table, split.train);
  const auto test_rows = data::take_rows(table, split.test);
  const auto meta = data::fit_encoder(train_rows, schema);
  return {data::encode(train_rows, meta), data::encode(test_rows, meta)};
}

}  // namespace

void DatasetSpec::validate() const {
  if (synthetic.has_value() == schema.has_value()) {
    throw ConfigError("dataset: exactly one of synthetic config or schema must be set");
  }
  if (synthetic) synthetic->validate();
  if (schema) {
    schema->validate();
    if (csv.empty()) throw ConfigError(fmt::format("dataset '{}': no CSV path given", name));
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
      throw ConfigError(fmt::format("test_fraction must be in (0, 1), got {}", test_fraction));
    }
  }
}

nlohmann::json to_json(const DatasetSpec& spec) {
  nlohmann::json j;
  j["name"] = spec.name;
  if (spec.synthetic) {
    const auto& s = *spec.synthetic;
    j["kind"] = "synthetic";
    j["n_train"] = s.n_train;
    j["n_test"] = s.n_test;
    j["d"] = s.d;
    j["p_bias_train"] = s.p_bias_train;
    j["p_bias_test"] = s.p_bias_test;
  } else {
    j["kind"] = "tabular";
    if (spec.schema) j["schema"] = data::schema_to_json(*spec.schema);
    j["csv"] = spec.csv.string();
    j["test_fraction"] = spec.test_fraction;
  }
  return j;
}

DatasetSpec dataset_spec_from_json(const nlohmann::json& j) {
  DatasetSpec spec;
  try {
    spec.name = j.value("name", std::string("synthetic"));
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "synthetic") {
      data::SyntheticConfig s;
      s.n_train = j.value("n_train", s.n_train);
      s.n_test = j.value("n_test", s.n_test);
      s.d = j.value("d", s.d);
      s.p_bias_train = j.value("p_bias_train", s.p_bias_train);
      s.p_bias_test = j.value("p_bias_test", s.p_bias_test);
      spec.synthetic = s;
    } else if (kind == "tabular") {
      spec.schema = data::schema_from_json(j.at("schema"));
      spec.csv = j.at("csv").get<std::string>();
      spec.test_fraction = j.value("test_fraction", spec.test_fraction);
    } else {
      throw ConfigError(fmt::format("dataset kind '{}' is not synthetic or tabular", kind));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("dataset config: {}", e.what()));
  }
  return spec;
}

std::vector<FoldData> prepare_folds(const DatasetSpec& spec, std::uint64_t seed,
                                    std::size_t folds) {
  spec.validate();
  if (folds == 0) throw ConfigError("folds must be at least 1");
  std::vector<FoldData> out;
  if (spec.synthetic) {
    for (std::size_t f = 0; f < folds; ++f) {
      auto s = *spec.synthetic;
      s.seed = seed + f;
      auto [train, test] = data::gen_synthetic(s);
      out.push_back({f, std::move(train), std::move(test), seed + f});
    }
    return out;
  }
  const auto table = data::load_tabular(spec.csv, *spec.schema);
  std::vector<data::Split> splits;
  if (folds > 1) {
    splits = data::kfold_indices(table.size(), folds, seed);
  } else {
    splits.push_back(data::split_indices(table.size(), spec.test_fraction, seed));
  }
  for (std::size_t f = 0; f < splits.size(); ++f) {
    auto [train, test] = encode_split(table, *spec.schema, splits[f]);
    out.push_back({f, std::move(train), std::move(test), seed + f});
  }
  return out;
}

metrics::FoldMetrics evaluate_bundle(const nn::ModelBundle& bundle,
                                     const data::EncodedDataset& test, std::size_t fold) {
  if (test.input_dim() != bundle.input_dim) {
    throw ShapeError(fmt::format("model expects {} input features, data has {}",
                                 bundle.input_dim, test.input_dim()));
  }
  const auto pred = predict_labels(bundle, test.x);
  metrics::FoldMetrics m;
  m.fold = fold;
  m.accuracy_y = metrics::accuracy(pred, test.y);
  m.di = metrics::disparate_impact(pred, test.a);
  m.eo = metrics::equal_opportunity(pred, test.a, test.y);
  m.leakage_a = metrics::probe_accuracy(bundle, test);
  for (int a : test.a) (a == 1 ? m.n_a1 : m.n_a0)++;
  return m;
}

FoldOutcome run_fold(const FoldData& fold, const TrainConfig& cfg,
                     const std::string& config_json) {
  cfg.validate();
  auto init_rng = make_rng(fold.model_seed, kInit);
  FoldOutcome out{nn::init_bundle(fold.train.input_dim(), init_rng), {}, {}};
  auto& bundle = out.bundle;
  bundle.config_json = config_json;
  if (cfg.weights.use_rec) {
    auto rng = make_rng(fold.model_seed, kStep1);
    out.log.append(train_step1(fold.train, bundle, cfg, rng));
  }
  {
    auto rng = make_rng(fold.model_seed, kStep2);
    out.log.append(train_step2(fold.train, bundle, cfg, rng));
  }
  {
    auto rng = make_rng(fold.model_seed, kFinetune);
    out.log.append(finetune_classifier(fold.train, bundle, cfg, rng));
  }
  {
    auto rng = make_rng(fold.model_seed, kProbe);
    metrics::leakage_probe(bundle, fold.train, fold.test, cfg, rng, &out.log);
  }
  out.metrics = evaluate_bundle(bundle, fold.test, fold.fold);
  return out;
}

nlohmann::json effective_config(const DatasetSpec& spec, const TrainConfig& cfg,
                                std::size_t folds) {
  return {{"dataset", to_json(spec)}, {"train", to_json(cfg)}, {"folds", folds}};
}

PipelineResult run_pipeline(const DatasetSpec& spec, const TrainConfig& cfg, std::size_t folds,
                            const std::optional<std::filesystem::path>& out_dir,
                            const std::string& run_id) {
  cfg.validate();
  PipelineResult result;
  result.config = effective_config(spec, cfg, folds);
  result.config["run_id"] = run_id;
  const auto fold_data = prepare_folds(spec, cfg.seed, folds);
  std::vector<metrics::FoldMetrics> fold_metrics;
  for (const auto& fd : fold_data) {
    auto fold_config = result.config;
    fold_config["fold"] = fd.fold;
    auto outcome = run_fold(fd, cfg, fold_config.dump());
    if (out_dir) {
      const auto dir = *out_dir / fmt::format("fold{}", fd.fold);
      std::filesystem::create_directories(dir);
      nn::save_bundle(outcome.bundle, dir / "model.ckpt");
      write_run_log(outcome.log, outcome.bundle.config_json, dir / "runlog.csv");
    }
    fold_metrics.push_back(outcome.metrics);
    result.folds.push_back(std::move(outcome));
  }
  result.report = metrics::FairnessReport::aggregate(std::move(fold_metrics));
  if (out_dir) {
    metrics::write_text_file(*out_dir / "config.json", result.config.dump(2) + "\n");
    const metrics::RunIdentity id{run_id,
                                  spec.name,
                                  cfg.weights.lambda1,
                                  cfg.weights.lambda2,
                                  cfg.weights.lambda3,
                                  cfg.k};
    metrics::write_text_file(
        *out_dir / "results.csv",
        metrics::format_results(metrics::report_rows(id, result.report), result.config.dump()));
  }
  return result;
}

}  // namespace locfair::train
