#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "grad_cases.hpp"
#include "locfair/cli/cli.hpp"
#include "locfair/data/synthetic.hpp"
#include "locfair/losses/knn.hpp"
#include "locfair/losses/losses.hpp"
#include "locfair/metrics/metrics.hpp"
#include "locfair/train/pipeline.hpp"
#include "oracles.hpp"

using namespace locfair;
namespace fs = std::filesystem;

namespace {

constexpr int kGradTrials = 100;
constexpr double kGradTolerance = 1e-4;
constexpr double kGradSeconds = 60.0;
constexpr int kKnnInstances = 500;
constexpr double kKnnSeconds = 60.0;
constexpr int kMetricTriples = 1000;
constexpr double kOracleSlack = 1e-12;
constexpr std::size_t kSeeds = 5;
constexpr double kTableTolerance = 0.04;
constexpr double kBiasGap = 0.03;
constexpr double kAccuracyDrop = 0.05;
constexpr std::size_t kAdultRows = 2000;
constexpr std::size_t kAdultFolds = 5;
constexpr int kMonotonePairs = 4;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string pct(double v) { return fmt::format("{:.1f}%", 100.0 * v); }

Verdict gradient_suite() {
  const auto start = Clock::now();
  double worst = 0.0;
  std::string worst_name;
  std::size_t trials = 0;
  auto cases = testsupport::op_grad_cases();
  const auto loss_cases = testsupport::loss_grad_cases();
  cases.insert(cases.end(), loss_cases.begin(), loss_cases.end());
  for (const auto& c : cases) {
    Rng rng(derive_seed(101, std::hash<std::string>{}(c.name)));
    for (int t = 0; t < kGradTrials; ++t, ++trials) {
      const auto r = c.trial(rng);
      if (r.max_rel_error > worst || !std::isfinite(r.max_rel_error)) {
        worst = r.max_rel_error;
        worst_name = c.name + " (" + r.worst + ")";
      }
    }
  }
  const double secs = seconds_since(start);
  return {worst < kGradTolerance && secs < kGradSeconds,
          fmt::format("{} cases x {} trials, worst relative error {:.2e} at {}, {:.1f} s",
                      cases.size(), kGradTrials, worst, worst_name, secs)};
}

Verdict knn_oracle() {
  const auto start = Clock::now();
  Rng rng(202);
  int mismatches = 0;
  for (int i = 0; i < kKnnInstances; ++i) {
    const auto n = std::uniform_int_distribution<std::size_t>(1, 200)(rng);
    const auto dim = std::uniform_int_distribution<std::size_t>(1, 20)(rng);
    const auto k = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    std::vector<double> pts(n * dim);
    // Half the instances live on a coarse integer grid to force distance ties.
    if (i % 2 == 0) {
      std::uniform_int_distribution<int> grid(-2, 2);
      for (double& v : pts) v = grid(rng);
    } else {
      std::normal_distribution<double> g;
      for (double& v : pts) v = g(rng);
    }
    const auto y = testsupport::random_labels(n, rng);
    if (losses::knn_same_label(pts, dim, y, k).neighbors !=
        testsupport::brute_force_knn(pts, dim, y, k)) {
      ++mismatches;
    }
  }
  const double secs = seconds_since(start);
  return {mismatches == 0 && secs < kKnnSeconds,
          fmt::format("{} instances, {} mismatches, {:.1f} s", kKnnInstances, mismatches, secs)};
}

Verdict local_zero_cases() {
  // r = 1, attributes split evenly within each label class, identical
  // embeddings; every neighbour list holds one row of each group.
  const auto same = ad::Tensor::filled(8, 4, 0.3);
  const std::vector<int> y8 = {1, 1, 1, 1, -1, -1, -1, -1};
  const std::vector<int> a8 = {0, 1, 0, 1, 0, 1, 0, 1};
  const std::vector<std::vector<std::size_t>> balanced = {{1, 2}, {0, 3}, {3, 0}, {2, 1},
                                                          {5, 6}, {4, 7}, {7, 4}, {6, 5}};
  const double balanced_loss =
      losses::local_fairness_loss_fixed(same, y8, a8, balanced, 1.0).item();
  const bool balanced_ok = std::abs(balanced_loss) <= 1e-15;

  Rng rng(303);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> vals(40);
  for (double& v : vals) v = u(rng);
  const std::vector<int> y10 = {1, 1, 1, 1, 1, -1, -1, -1, -1, -1};
  const std::vector<int> a10(10, 1);
  const double single =
      losses::local_fairness_loss(ad::Tensor::from(10, 4, vals), y10, a10, 3, 1.0).item();

  bool construction_ok = true;
  double worst_perturbed = 1e300;
  for (const auto& [m, r] :
       std::vector<std::pair<int, double>>{{1, 1.0}, {3, 2.0}, {4, 0.5}, {8, 4.0}, {6, 0.75}}) {
    const std::size_t n = static_cast<std::size_t>(m) + 2;
    std::vector<double> z(n, 1.0);
    z[n - 1] = m / r;
    std::vector<int> a(n, 0);
    a[n - 1] = 1;
    const std::vector<int> y(n, 1);
    std::vector<std::vector<std::size_t>> nb(n);
    for (std::size_t j = 1; j < n; ++j) nb[0].push_back(j);
    const double at = losses::local_fairness_loss_fixed(ad::Tensor::from(n, 1, z), y, a, nb, r)
                          .item();
    z[n - 1] = m / r * 1.01;
    const double off = losses::local_fairness_loss_fixed(ad::Tensor::from(n, 1, z), y, a, nb, r)
                           .item();
    construction_ok = construction_ok && std::abs(at) <= 1e-15 && off > 0.0;
    worst_perturbed = std::min(worst_perturbed, off);
  }
  return {balanced_ok && single > 0.0 && construction_ok,
          fmt::format("balanced {:.1e}, single group {:.4f}, M/r construction {} (smallest "
                      "perturbed loss {:.2e})",
                      balanced_loss, single, construction_ok ? "zero" : "NONZERO",
                      worst_perturbed)};
}

Verdict metric_oracles() {
  Rng rng(404);
  int mismatches = 0;
  for (int t = 0; t < kMetricTriples; ++t) {
    const auto n = std::uniform_int_distribution<std::size_t>(1, 300)(rng);
    const auto p = testsupport::random_labels(n, rng);
    const auto y = testsupport::random_labels(n, rng);
    const auto a = testsupport::random_attributes(n, rng);
    const auto c = metrics::Contingency::build(p, a, y);
    const auto o = testsupport::metrics_from_counts(p, a, y);
    const auto di = metrics::disparate_impact(p, a);
    const auto eo = metrics::equal_opportunity(p, a, y);
    const double acc = metrics::accuracy(p, y);
    auto near = [](const std::optional<double>& x, const std::optional<double>& z) {
      return x.has_value() == z.has_value() && (!x || std::abs(*x - *z) <= kOracleSlack);
    };
    const bool ok = c.accuracy() == acc && c.disparate_impact() == di &&
                    c.equal_opportunity() == eo && std::abs(acc - o.accuracy) <= kOracleSlack &&
                    near(di, o.di) && near(eo, o.eo);
    if (!ok) ++mismatches;
  }
  return {mismatches == 0, fmt::format("{} triples, {} mismatches", kMetricTriples, mismatches)};
}

struct RunSpec {
  std::string name;
  train::DatasetSpec data;
  train::TrainConfig cfg;
  std::size_t folds = kSeeds;
};

struct RunSummary {
  double acc = 0.0;
  double leak = 0.0;
  double di = 0.0;
};

/// Runs independent pipelines on all cores; results are independent of the
/// thread count.
std::map<std::string, RunSummary> run_all(const std::vector<RunSpec>& runs) {
  std::vector<RunSummary> out(runs.size());
  std::atomic<std::size_t> next{0};
  std::mutex io;
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      const auto start = Clock::now();
      const auto r = train::run_pipeline(runs[i].data, runs[i].cfg, runs[i].folds, std::nullopt);
      out[i] = {r.report.accuracy_y.mean.value_or(NAN), r.report.leakage_a.mean.value_or(NAN),
                r.report.di.mean.value_or(NAN)};
      std::lock_guard lock(io);
      std::cout << fmt::format("  {:<24} acc_y {:.4f}  leakage {:.4f}  di {:.4f}  ({:.0f} s)\n",
                               runs[i].name, out[i].acc, out[i].leak, out[i].di,
                               seconds_since(start))
                << std::flush;
    }
  };
  const unsigned n = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < std::min<std::size_t>(n, runs.size()); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::map<std::string, RunSummary> by_name;
  for (std::size_t i = 0; i < runs.size(); ++i) by_name[runs[i].name] = out[i];
  return by_name;
}

train::DatasetSpec synthetic(double p_bias_train = 0.5) {
  train::DatasetSpec spec;
  data::SyntheticConfig s;
  s.p_bias_train = p_bias_train;
  spec.synthetic = s;
  return spec;
}

RunSpec row_run(int row, double p_bias = 0.5, std::size_t k = 4) {
  train::TrainConfig cfg;
  cfg.weights = train::ablation_row(row);
  cfg.k = k;
  return {fmt::format("row{} p{} K{}", row, p_bias, k), synthetic(p_bias), cfg};
}

struct TableTarget {
  int row;
  double leak;
  double acc;
};
constexpr TableTarget kTable[] = {{1, 0.67, 0.57}, {2, 0.55, 0.58}, {9, 0.58, 0.60},
                                  {12, 0.53, 0.61}};

std::map<std::string, RunSummary> synthetic_runs() {
  std::vector<RunSpec> runs;
  for (const auto& t : kTable) runs.push_back(row_run(t.row));
  runs.push_back(row_run(16));
  runs.push_back(row_run(12, 0.5, 16));
  runs.push_back(row_run(12, 0.75));
  runs.push_back(row_run(16, 0.75));
  return run_all(runs);
}

Verdict table_reproduction(const std::map<std::string, RunSummary>& s) {
  bool ok = true;
  std::string detail;
  for (const auto& t : kTable) {
    const auto& r = s.at(row_run(t.row).name);
    const bool row_ok = std::abs(r.leak - t.leak) <= kTableTolerance &&
                        std::abs(r.acc - t.acc) <= kTableTolerance;
    ok = ok && row_ok;
    detail += fmt::format("{}row {}: leakage {} (want {}), acc_y {} (want {}){}", detail.empty()
                                                                                   ? ""
                                                                                   : "; ",
                          t.row, pct(r.leak), pct(t.leak), pct(r.acc), pct(t.acc),
                          row_ok ? "" : " MISS");
  }
  return {ok, detail};
}

Verdict orderings(const std::map<std::string, RunSummary>& s) {
  const double l1 = s.at(row_run(1).name).leak;
  const double l9 = s.at(row_run(9).name).leak;
  const double l12 = s.at(row_run(12).name).leak;
  const double l16 = s.at(row_run(16).name).leak;
  const double k16 = s.at(row_run(12, 0.5, 16).name).leak;
  const bool a = l12 < l9 && l9 < l1;
  const bool b = l16 >= l12;
  const bool c = k16 >= l12;
  return {a && b && c,
          fmt::format("row12 {} < row9 {} < row1 {}: {}; row16 {} >= row12: {}; K=16 {} >= "
                      "K=4: {}",
                      pct(l12), pct(l9), pct(l1), a ? "yes" : "no", pct(l16), b ? "yes" : "no",
                      pct(k16), c ? "yes" : "no")};
}

Verdict bias_direction(const std::map<std::string, RunSummary>& s) {
  const double lo = s.at(row_run(12, 0.75).name).leak;
  const double hi = s.at(row_run(16, 0.75).name).leak;
  return {hi - lo >= kBiasGap,
          fmt::format("p_bias 0.75: leakage {} at lambda3=1 vs {} at lambda3=0.1, gap {:.1f} pp "
                      "(need >= {:.0f})",
                      pct(hi), pct(lo), 100.0 * (hi - lo), 100.0 * kBiasGap)};
}

Verdict adult_properties(const fs::path& scratch) {
  const auto csv = scratch / "adult_format.csv";
  std::ofstream(csv) << data::gen_adult_format_csv(kAdultRows, 0);
  train::DatasetSpec spec;
  spec.name = "adult";
  spec.schema = data::preset_schema("adult");
  spec.csv = csv;

  std::vector<RunSpec> runs;
  train::TrainConfig vanilla;
  vanilla.weights = train::ablation_row(1);
  runs.push_back({"vanilla", spec, vanilla, kAdultFolds});
  const std::vector<double> grid = {1.0, 0.75, 0.5, 0.2, 0.1, 0.0};
  for (double l3 : grid) {
    train::TrainConfig cfg;
    cfg.weights.lambda3 = l3;
    cfg.weights.use_y = l3 > 0.0;
    runs.push_back({fmt::format("lambda3={}", l3), spec, cfg, kAdultFolds});
  }
  const auto s = run_all(runs);
  const auto& v = s.at("vanilla");
  const auto& full = s.at("lambda3=0.1");
  const bool lower_di = full.di < v.di;
  const bool small_drop = v.acc - full.acc <= kAccuracyDrop;
  // Vanilla, then decreasing lambda3: 6 adjacent pairs.
  std::vector<double> di = {v.di};
  for (double l3 : grid) di.push_back(s.at(fmt::format("lambda3={}", l3)).di);
  int non_increasing = 0;
  for (std::size_t i = 1; i < di.size(); ++i) non_increasing += di[i] <= di[i - 1] ? 1 : 0;
  std::string seq;
  for (double d : di) seq += fmt::format("{}{:.3f}", seq.empty() ? "" : " ", d);
  return {lower_di && small_drop && non_increasing >= kMonotonePairs,
          fmt::format("DI {:.3f} vs vanilla {:.3f}; acc_y {} vs {} (drop {:.1f} pp); leakage "
                      "{} vs {}; DI over vanilla,1..0 = [{}], {} of 6 pairs non-increasing",
                      full.di, v.di, pct(full.acc), pct(v.acc), 100.0 * (v.acc - full.acc),
                      pct(full.leak), pct(v.leak), seq, non_increasing)};
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::string text;
    if (e.path().filename() == "runlog.csv") {
      // Drop the trailing wall-clock column.
      for (std::string line; std::getline(in, line);) {
        if (line.rfind('#', 0) != 0) line = line.substr(0, line.rfind(','));
        text += line + "\n";
      }
    } else {
      std::ostringstream s;
      s << in.rdbuf();
      text = s.str();
    }
    out[fs::relative(e.path(), root).string()] = std::move(text);
  }
  return out;
}

Verdict determinism(const fs::path& scratch) {
  const std::vector<std::string> common = {"--n-train", "200", "--n-test", "100", "--epochs", "3",
                                           "--finetune-epochs", "3", "--probe-epochs", "3",
                                           "--seed", "7"};
  auto invoke = [&](std::vector<std::string> args, const fs::path& out) {
    args.insert(args.end(), common.begin(), common.end());
    args.push_back("--out");
    args.push_back(out.string());
    std::ostringstream o, e;
    const int code = cli::run(args, o, e);
    return std::pair{code, o.str()};
  };
  std::size_t files = 0;
  bool same = true;
  for (int i = 0; i < 2; ++i) {
    const std::vector<std::string> args =
        i == 0 ? std::vector<std::string>{"train", "--folds", "2"}
               : std::vector<std::string>{"sweep", "--sweep", "K", "--values", "2,4", "--jobs",
                                          "2"};
    const auto a = scratch / fmt::format("det{}_a", i);
    const auto b = scratch / fmt::format("det{}_b", i);
    const auto ra = invoke(args, a);
    const auto rb = invoke(args, b);
    const auto ta = tree_contents(a);
    same = same && ra == rb && ra.first == 0 && ta == tree_contents(b);
    files += ta.size();
  }
  return {same, fmt::format("train and sweep re-runs, {} files compared (run-log wall-clock excluded), {}", files,
                            same ? "identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional criterion numbers restrict the run, e.g. `acceptance 1 9`.
  std::set<std::size_t> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoul(argv[i]));

  const auto scratch = fs::temp_directory_path() / "locfair_acceptance";
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  std::vector<std::pair<std::string, std::function<Verdict()>>> criteria;
  std::map<std::string, RunSummary> synth;
  auto synth_once = [&]() -> const std::map<std::string, RunSummary>& {
    if (synth.empty()) synth = synthetic_runs();
    return synth;
  };
  criteria.emplace_back("gradient suite", gradient_suite);
  criteria.emplace_back("KNN oracle", knn_oracle);
  criteria.emplace_back("local fairness zero cases", local_zero_cases);
  criteria.emplace_back("metric oracles", metric_oracles);
  criteria.emplace_back("ablation rows 1, 2, 9, 12 within 4 pp",
                        [&] { return table_reproduction(synth_once()); });
  criteria.emplace_back("leakage orderings", [&] { return orderings(synth_once()); });
  criteria.emplace_back("bias sweep direction", [&] { return bias_direction(synth_once()); });
  criteria.emplace_back("Adult-format fairness properties",
                        [&] { return adult_properties(scratch); });
  criteria.emplace_back("byte determinism", [&] { return determinism(scratch); });

  int failed = 0;
  std::vector<std::string> lines;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.contains(i + 1)) continue;
    const auto start = Clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const auto line = fmt::format("criterion {}: {} {}: {} [{:.0f} s]", i + 1,
                                  v.pass ? "PASS" : "FAIL", criteria[i].first, v.detail,
                                  seconds_since(start));
    std::cout << line << "\n" << std::flush;
    lines.push_back(line);
    if (!v.pass) ++failed;
  }
  std::cout << "\nsummary\n";
  for (const auto& l : lines) std::cout << l.substr(0, l.find(':', 12)) << "\n";
  std::cout << fmt::format("{} of {} criteria passed\n", lines.size() - failed, lines.size());
  return failed == 0 ? 0 : 1;
}
