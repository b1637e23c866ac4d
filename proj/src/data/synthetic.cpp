#include "locfair/data/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "locfair/error.hpp"

namespace locfair::data {

void SyntheticConfig::validate() const {
  if (d == 0) throw ConfigError("synthetic: d must be >= 1");
  if (n_train == 0 || n_test == 0) throw ConfigError("synthetic: sample counts must be >= 1");
  for (double p : {p_bias_train, p_bias_test}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError(fmt::format("synthetic: p_bias {} outside [0, 1]", p));
    }
  }
}

EncodedDataset gen_synthetic_split(std::size_t n, std::size_t d, double p_bias, Rng& rng) {
  EncodedDataset out;
  out.x = Matrix(n, 1 + 2 * d);
  out.y.resize(n);
  out.a.resize(n);
  std::vector<int> y_biased(n), y_unbiased(n);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int r = coin(rng) ? 1 : 0;
    const int yo = coin(rng) ? 1 : 0;
    auto xr = out.x.row(i);
    xr[0] = r;
    const double v = r + noise(rng);
    for (std::size_t k = 0; k < d; ++k) xr[1 + k] = v + noise(rng);
    const double w = v + noise(rng);
    const double vo = yo + noise(rng);
    for (std::size_t k = 0; k < d; ++k) xr[1 + d + k] = vo + noise(rng);
    out.a[i] = r;
    y_biased[i] = w > 0.0 ? 1 : -1;
    y_unbiased[i] = 2 * yo - 1;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_biased = static_cast<std::size_t>(std::llround(p_bias * static_cast<double>(n)));
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    out.y[i] = k < n_biased ? y_biased[i] : y_unbiased[i];
  }

  FeatureColumn r_col{"r", ColumnKind::kContinuous, 0, 1, {}, 0.0, 1.0};
  out.columns.push_back(r_col);
  for (std::size_t k = 0; k < 2 * d; ++k) {
    const bool first = k < d;
    out.columns.push_back(FeatureColumn{
        fmt::format("{}{}", first ? "u_r" : "u_yo", (first ? k : k - d) + 1),
        ColumnKind::kContinuous, 1 + k, 1, {}, 0.0, 0.0});
  }
  return out;
}

std::pair<EncodedDataset, EncodedDataset> gen_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  Rng train_rng = make_rng(cfg.seed, 0x7a1);
  Rng test_rng = make_rng(cfg.seed, 0x7e5);
  auto train = gen_synthetic_split(cfg.n_train, cfg.d, cfg.p_bias_train, train_rng);
  auto test = gen_synthetic_split(cfg.n_test, cfg.d, cfg.p_bias_test, test_rng);
  return {std::move(train), std::move(test)};
}

namespace {

template <std::size_t N>
const char* pick(Rng& rng, const std::array<const char*, N>& names,
                 const std::array<double, N>& weights) {
  std::discrete_distribution<std::size_t> dist(weights.begin(), weights.end());
  return names[dist(rng)];
}

constexpr std::array<const char*, 16> kEducation = {
    "Preschool",  "1st-4th",   "5th-6th",   "7th-8th",    "9th",       "10th",
    "11th",       "12th",      "HS-grad",   "Some-college", "Assoc-voc", "Assoc-acdm",
    "Bachelors",  "Masters",   "Prof-school", "Doctorate"};

}  // namespace

std::string gen_adult_format_csv(std::size_t rows, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0xad017);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::string out =
      "age,workclass,fnlwgt,education,education-num,marital-status,occupation,relationship,"
      "race,sex,capital-gain,capital-loss,hours-per-week,native-country,income\n";
  for (std::size_t i = 0; i < rows; ++i) {
    const bool male = unit(rng) < 0.67;
    const int age = std::clamp(static_cast<int>(std::lround(38.5 + 13.5 * gauss(rng))), 17, 90);
    const int edu = std::clamp(static_cast<int>(std::lround(10.1 + 2.6 * gauss(rng))), 1, 16);
    const double maturity = std::min(1.0, (age - 17) / 15.0);
    const bool married = unit(rng) < (male ? 0.62 : 0.2) * maturity;

    const char* marital = "Married-civ-spouse";
    const char* relationship = male ? "Husband" : "Wife";
    if (!married) {
      marital = age < 30 ? pick<4>(rng, {"Never-married", "Divorced", "Separated", "Widowed"},
                                   {0.85, 0.1, 0.04, 0.01})
                         : pick<4>(rng, {"Never-married", "Divorced", "Separated", "Widowed"},
                                   {0.35, 0.4, 0.1, 0.15});
      relationship = age < 25 ? pick<3>(rng, {"Own-child", "Not-in-family", "Other-relative"},
                                        {0.6, 0.3, 0.1})
                              : pick<3>(rng, {"Not-in-family", "Unmarried", "Other-relative"},
                                        {0.6, 0.32, 0.08});
    }

    const char* occupation;
    bool professional = false;
    if (edu >= 13 && unit(rng) < 0.7) {
      occupation = pick<2>(rng, {"Prof-specialty", "Exec-managerial"}, {0.55, 0.45});
      professional = true;
    } else if (edu >= 9) {
      occupation = male ? pick<5>(rng,
                                  {"Craft-repair", "Sales", "Tech-support", "Adm-clerical",
                                   "Protective-serv"},
                                  {0.4, 0.25, 0.1, 0.1, 0.15})
                        : pick<5>(rng,
                                  {"Craft-repair", "Sales", "Tech-support", "Adm-clerical",
                                   "Protective-serv"},
                                  {0.05, 0.25, 0.1, 0.55, 0.05});
    } else {
      occupation = male ? pick<5>(rng,
                                  {"Handlers-cleaners", "Machine-op-inspct", "Other-service",
                                   "Farming-fishing", "Transport-moving"},
                                  {0.25, 0.25, 0.1, 0.15, 0.25})
                        : pick<5>(rng,
                                  {"Handlers-cleaners", "Machine-op-inspct", "Other-service",
                                   "Farming-fishing", "Transport-moving"},
                                  {0.05, 0.3, 0.55, 0.05, 0.05});
    }
    const char* workclass = pick<6>(
        rng, {"Private", "Self-emp-not-inc", "Local-gov", "State-gov", "Federal-gov", "Self-emp-inc"},
        {0.72, 0.08, 0.07, 0.05, 0.04, 0.04});
    const char* race = pick<5>(
        rng, {"White", "Black", "Asian-Pac-Islander", "Amer-Indian-Eskimo", "Other"},
        {0.85, 0.1, 0.03, 0.01, 0.01});
    const char* country = pick<5>(
        rng, {"United-States", "Mexico", "Philippines", "Germany", "Canada"},
        {0.91, 0.04, 0.02, 0.015, 0.015});
    const int hours =
        std::clamp(static_cast<int>(std::lround(38.0 + (male ? 5.0 : 0.0) + 11.0 * gauss(rng))),
                   1, 99);
    const int capital_gain =
        unit(rng) < 0.08 ? static_cast<int>(std::lround(std::exp(7.5 + 1.2 * gauss(rng)))) : 0;
    const int capital_loss =
        unit(rng) < 0.05 ? static_cast<int>(std::lround(1900 + 300 * gauss(rng))) : 0;
    const int fnlwgt = static_cast<int>(std::lround(190000 + 100000 * std::abs(gauss(rng))));

    const double logit = -10.2 + 0.36 * edu + 0.05 * std::min(age, 60) + 0.035 * hours +
                         1.6 * (married ? 1.0 : 0.0) + 0.9 * (male ? 1.0 : 0.0) +
                         0.7 * (professional ? 1.0 : 0.0) + 2.5 * (capital_gain > 5000 ? 1.0 : 0.0);
    const bool rich = unit(rng) < 1.0 / (1.0 + std::exp(-logit));

    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", age, workclass, fnlwgt,
                       kEducation[static_cast<std::size_t>(edu - 1)], edu, marital, occupation,
                       relationship, race, male ? "Male" : "Female", capital_gain,
                       std::max(capital_loss, 0), hours, country, rich ? ">50K" : "<=50K");
  }
  return out;
}

}  // namespace locfair::data
