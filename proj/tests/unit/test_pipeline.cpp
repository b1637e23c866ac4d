#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "locfair/data/schema.hpp"
#include "locfair/data/synthetic.hpp"
#include "locfair/error.hpp"
#include "locfair/metrics/report_io.hpp"
#include "locfair/nn/bundle.hpp"
#include "locfair/train/pipeline.hpp"

using namespace locfair;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("locfair_test_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

train::TrainConfig tiny_config() {
  train::TrainConfig cfg;
  cfg.epochs = 2;
  cfg.finetune_epochs = 2;
  cfg.probe_epochs = 2;
  cfg.d_steps = 1;
  return cfg;
}

train::DatasetSpec tiny_synthetic() {
  train::DatasetSpec spec;
  data::SyntheticConfig s;
  s.n_train = 60;
  s.n_test = 30;
  s.d = 3;
  spec.synthetic = s;
  return spec;
}

train::DatasetSpec adult_spec(const fs::path& dir) {
  const auto csv = dir / "adult.csv";
  std::ofstream(csv) << data::gen_adult_format_csv(300, 1);
  train::DatasetSpec spec;
  spec.name = "adult";
  spec.schema = data::preset_schema("adult");
  spec.csv = csv;
  return spec;
}

}  // namespace

TEST_CASE("dataset specs round-trip through JSON") {
  const auto s = tiny_synthetic();
  const auto back = train::dataset_spec_from_json(train::to_json(s));
  CHECK(train::to_json(back) == train::to_json(s));
  const auto dir = scratch("json");
  const auto t = adult_spec(dir);
  CHECK(train::to_json(train::dataset_spec_from_json(train::to_json(t))) == train::to_json(t));
  CHECK_THROWS_AS(train::dataset_spec_from_json({{"kind", "image"}}), ConfigError);
  CHECK_THROWS_AS(train::dataset_spec_from_json({{"name", "x"}}), ConfigError);
}

TEST_CASE("dataset spec validation") {
  train::DatasetSpec both = tiny_synthetic();
  both.schema = data::preset_schema("adult");
  CHECK_THROWS_AS(both.validate(), ConfigError);
  train::DatasetSpec no_csv;
  no_csv.synthetic.reset();
  no_csv.schema = data::preset_schema("adult");
  CHECK_THROWS_AS(no_csv.validate(), ConfigError);
}

TEST_CASE("synthetic folds use consecutive seeds") {
  const auto folds = train::prepare_folds(tiny_synthetic(), 10, 3);
  REQUIRE(folds.size() == 3);
  CHECK(folds[2].model_seed == 12);
  CHECK(folds[0].train.size() == 60);
  CHECK(folds[0].test.size() == 30);
  CHECK(folds[0].train.x.data != folds[1].train.x.data);
  CHECK_THROWS_AS(train::prepare_folds(tiny_synthetic(), 0, 0), ConfigError);
}

TEST_CASE("tabular folds partition the rows") {
  const auto dir = scratch("folds");
  const auto spec = adult_spec(dir);
  const auto folds = train::prepare_folds(spec, 3, 5);
  REQUIRE(folds.size() == 5);
  std::size_t tested = 0;
  for (const auto& f : folds) {
    tested += f.test.size();
    CHECK(f.train.size() + f.test.size() == 300);
    CHECK(f.train.input_dim() == f.test.input_dim());
  }
  CHECK(tested == 300);
  const auto single = train::prepare_folds(spec, 3, 1);
  CHECK(single[0].test.size() == 60);
}

TEST_CASE("pipeline writes artifacts and is reproducible") {
  const auto dir = scratch("run");
  const auto spec = tiny_synthetic();
  const auto cfg = tiny_config();
  const auto a = train::run_pipeline(spec, cfg, 2, dir / "a", "demo");
  const auto b = train::run_pipeline(spec, cfg, 2, dir / "b", "demo");
  for (const char* f : {"results.csv", "config.json", "fold0/model.ckpt", "fold1/runlog.csv"}) {
    INFO(f);
    REQUIRE(fs::exists(dir / "a" / f));
  }
  for (const char* f : {"results.csv", "config.json", "fold0/model.ckpt", "fold1/model.ckpt"}) {
    INFO(f);
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  CHECK(a.report.folds.size() == 2);
  CHECK(a.config.at("run_id") == "demo");
  const auto results = slurp(dir / "a" / "results.csv");
  CHECK(results.rfind("# config: ", 0) == 0);
  CHECK(results.find("demo,synthetic,") != std::string::npos);
  CHECK(results.find(",mean,") != std::string::npos);

  const auto bundle = nn::load_bundle(dir / "a" / "fold0" / "model.ckpt");
  const auto stored = nlohmann::json::parse(bundle.config_json);
  CHECK(stored.at("fold") == 0);
  CHECK(stored.at("train") == train::to_json(cfg));
  const auto folds = train::prepare_folds(spec, cfg.seed, 2);
  const auto again = train::evaluate_bundle(bundle, folds[0].test, 0);
  CHECK(again.accuracy_y == a.report.folds[0].accuracy_y);
  CHECK(again.leakage_a == a.report.folds[0].leakage_a);
  CHECK(again.n_a0 + again.n_a1 == 30);
}

TEST_CASE("evaluating on data of the wrong width names both dimensions") {
  auto spec = tiny_synthetic();
  const auto result = train::run_pipeline(spec, tiny_config(), 1, std::nullopt);
  spec.synthetic->d = 4;
  const auto other = train::prepare_folds(spec, 0, 1);
  try {
    train::evaluate_bundle(result.folds[0].bundle, other[0].test, 0);
    FAIL("expected a ShapeError");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("model expects 7 input features, data has 9") !=
          std::string::npos);
  }
}

TEST_CASE("a tabular pipeline runs end to end") {
  const auto dir = scratch("tabular");
  const auto result = train::run_pipeline(adult_spec(dir), tiny_config(), 2, dir / "out");
  CHECK(result.report.folds.size() == 2);
  for (const auto& f : result.report.folds) {
    CHECK(f.accuracy_y >= 0.0);
    CHECK(f.accuracy_y <= 1.0);
    CHECK(f.leakage_a >= 0.0);
    CHECK(f.leakage_a <= 1.0);
  }
  CHECK(fs::exists(dir / "out" / "results.csv"));
}

TEST_CASE("results file column projections") {
  metrics::FoldMetrics f;
  f.accuracy_y = 0.5;
  f.di = 0.25;
  const auto report = metrics::FairnessReport::aggregate({f});
  const metrics::RunIdentity id{"r", "synthetic", 1, 1, 0.1, 4};
  const auto rows = metrics::report_rows(id, report);
  const auto all = metrics::format_results(rows, "{}");
  CHECK(all.find("accuracy_y,di,eo,leakage_a,") != std::string::npos);
  CHECK(all.find("NA") != std::string::npos);
  const auto eo = metrics::format_results(rows, "{}", metrics::MetricSelection::kEo);
  CHECK(eo.find(",di") == std::string::npos);
  CHECK(eo.find("leakage") == std::string::npos);
  CHECK(eo.find("accuracy_y,eo,accuracy_y_stderr,eo_stderr") != std::string::npos);
  CHECK_THROWS_AS(metrics::parse_metric_selection("dp"), ConfigError);
}
