#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "locfair/data/encoder.hpp"
#include "locfair/data/schema.hpp"
#include "locfair/data/synthetic.hpp"
#include "locfair/metrics/metrics.hpp"
#include "locfair/nn/bundle.hpp"
#include "locfair/train/config.hpp"

namespace locfair::train {

/// Where the rows come from: the synthetic generator or a delimited file read
/// through a schema.
struct DatasetSpec {
  std::string name = "synthetic";
  std::optional<data::SyntheticConfig> synthetic;
  std::optional<data::DatasetSchema> schema;
  std::filesystem::path csv;
  /// Held-out share when a tabular dataset runs with a single fold.
  double test_fraction = 0.2;

  bool is_synthetic() const { return synthetic.has_value(); }
  void validate() const;
};

nlohmann::json to_json(const DatasetSpec& spec);
DatasetSpec dataset_spec_from_json(const nlohmann::json& j);

struct FoldData {
  std::size_t fold = 0;
  data::EncodedDataset train;
  data::EncodedDataset test;
  /// Seed for model initialisation and all training streams of this fold.
  std::uint64_t model_seed = 0;
};

/// Synthetic: fold f draws a fresh dataset from seed + f. Tabular: k-fold
/// partition when folds > 1, otherwise one shuffled split; the encoder is fit
/// on each training side.
std::vector<FoldData> prepare_folds(const DatasetSpec& spec, std::uint64_t seed,
                                    std::size_t folds);

struct FoldOutcome {
  nn::ModelBundle bundle;
  RunLog log;
  metrics::FoldMetrics metrics;
};

/// Step I (when reconstruction is on), step II, classifier finetune, leakage
/// probe, then test metrics.
FoldOutcome run_fold(const FoldData& fold, const TrainConfig& cfg,
                     const std::string& config_json = "{}");

/// Test metrics of a trained bundle, including the stored probe.
metrics::FoldMetrics evaluate_bundle(const nn::ModelBundle& bundle,
                                     const data::EncodedDataset& test, std::size_t fold);

struct PipelineResult {
  std::vector<FoldOutcome> folds;
  metrics::FairnessReport report;
  nlohmann::json config;
};

nlohmann::json effective_config(const DatasetSpec& spec, const TrainConfig& cfg,
                                std::size_t folds);

/// Runs every fold. With out_dir set, writes config.json, results.csv and
/// fold<i>/{model.ckpt,runlog.csv}.
PipelineResult run_pipeline(const DatasetSpec& spec, const TrainConfig& cfg, std::size_t folds,
                            const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                            const std::string& run_id = "run");

}  // namespace locfair::train
