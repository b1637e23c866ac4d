#include <doctest.h>

#include <cmath>

#include "grad_cases.hpp"
#include "locfair/autodiff/ops.hpp"
#include "locfair/error.hpp"

using namespace locfair;
using ad::Tensor;

TEST_CASE("every op matches central differences on random inputs") {
  for (const auto& c : testsupport::op_grad_cases()) {
    Rng rng(derive_seed(11, std::hash<std::string>{}(c.name)));
    for (int trial = 0; trial < 10; ++trial) {
      const auto r = c.trial(rng);
      INFO(c.name, " trial ", trial, " worst ", r.worst);
      CHECK(r.max_rel_error < 1e-4);
    }
  }
}

TEST_CASE("matmul forward on a known product") {
  auto a = Tensor::from(2, 3, {1, 2, 3, 4, 5, 6});
  auto b = Tensor::from(3, 2, {7, 8, 9, 10, 11, 12});
  const auto c = ad::matmul(a, b);
  CHECK(c.rows() == 2);
  CHECK(c.cols() == 2);
  CHECK(c.at(0, 0) == 58);
  CHECK(c.at(0, 1) == 64);
  CHECK(c.at(1, 0) == 139);
  CHECK(c.at(1, 1) == 154);
  CHECK_THROWS_AS(ad::matmul(a, a), ShapeError);
}

TEST_CASE("leaky_relu and sigmoid forward values") {
  auto x = Tensor::from(1, 3, {-2.0, 0.0, 3.0});
  const auto l = ad::leaky_relu(x, 0.2);
  CHECK(l.at(0, 0) == doctest::Approx(-0.4));
  CHECK(l.at(0, 1) == 0.0);
  CHECK(l.at(0, 2) == 3.0);
  const auto s = ad::sigmoid(x);
  CHECK(s.at(0, 1) == 0.5);
  CHECK(s.at(0, 2) == doctest::Approx(1.0 / (1.0 + std::exp(-3.0))));
}

TEST_CASE("dropout is the identity in eval mode") {
  Rng rng(3);
  auto x = testsupport::random_tensor(4, 5, rng);
  const auto y = ad::dropout(x, 0.5, false, rng);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.values()[i] == x.values()[i]);
}

TEST_CASE("dropout in train mode preserves the expectation within 2 percent") {
  Rng rng(5);
  auto x = Tensor::filled(100, 100, 1.0);
  const auto y = ad::dropout(x, 0.5, true, rng);
  double total = 0.0;
  std::size_t zeros = 0;
  for (double v : y.values()) {
    total += v;
    if (v == 0.0) ++zeros;
    else CHECK(v == 2.0);
  }
  CHECK(total / 10000.0 == doctest::Approx(1.0).epsilon(0.02));
  CHECK(static_cast<double>(zeros) / 10000.0 == doctest::Approx(0.5).epsilon(0.04));
  CHECK_THROWS_AS(ad::dropout(x, 1.0, true, rng), ConfigError);
}

TEST_CASE("mean_bce of a uniform prediction is ln 2") {
  auto p = Tensor::filled(4, 1, 0.5, true);
  const std::vector<double> t = {0, 1, 1, 0};
  const auto loss = ad::mean_bce(p, t);
  CHECK(loss.item() == doctest::Approx(std::log(2.0)));
}

TEST_CASE("mean_bce clamps saturated predictions and has zero gradient there") {
  auto p = Tensor::from(2, 1, {0.0, 1.0}, true);
  const std::vector<double> t = {1, 0};
  const auto loss = ad::mean_bce(p, t);
  CHECK(loss.item() == doctest::Approx(-std::log(ad::kBceClamp)));
  loss.backward();
  CHECK(p.grad()[0] == 0.0);
  CHECK(p.grad()[1] == 0.0);
}

TEST_CASE("mean_bce rejects invalid predictions and targets") {
  const std::vector<double> t = {1};
  CHECK_THROWS_AS(ad::mean_bce(Tensor::from(1, 1, {1.5}), t), NumericError);
  CHECK_THROWS_AS(ad::mean_bce(Tensor::from(1, 1, {std::nan("")}), t), NumericError);
  const std::vector<double> bad = {0.5};
  CHECK_THROWS_AS(ad::mean_bce(Tensor::from(1, 1, {0.3}), bad), NumericError);
  CHECK_THROWS_AS(ad::mean_bce(Tensor::from(2, 1, {0.3, 0.3}), t), ShapeError);
}

TEST_CASE("l2_norm_rows uses a zero subgradient at the origin") {
  auto a = Tensor::from(2, 2, {0.0, 0.0, 3.0, 4.0}, true);
  const auto n = ad::l2_norm_rows(a);
  CHECK(n.at(0, 0) == 0.0);
  CHECK(n.at(1, 0) == 5.0);
  ad::sum(n).backward();
  CHECK(a.grad()[0] == 0.0);
  CHECK(a.grad()[1] == 0.0);
  CHECK(a.grad()[2] == doctest::Approx(0.6));
  CHECK(a.grad()[3] == doctest::Approx(0.8));
}

TEST_CASE("leaf gradients accumulate across backward calls") {
  auto a = Tensor::from(1, 2, {1.0, 2.0}, true);
  const auto loss = ad::sum(ad::scale(a, 3.0));
  loss.backward();
  loss.backward();
  CHECK(a.grad()[0] == 6.0);
  a.zero_grad();
  loss.backward();
  CHECK(a.grad()[1] == 3.0);
}

TEST_CASE("backward requires a scalar") {
  auto a = Tensor::from(1, 2, {1.0, 2.0}, true);
  CHECK_THROWS_AS(ad::scale(a, 2.0).backward(), ShapeError);
}

TEST_CASE("freezing after the forward pass does not change what backward reaches") {
  auto frozen = Tensor::from(1, 1, {2.0}, false);
  auto live = Tensor::from(1, 1, {3.0}, true);
  const auto loss = ad::sum(ad::matmul(frozen, live));
  frozen.set_requires_grad(true);
  loss.backward();
  CHECK_FALSE(frozen.has_grad());
  CHECK(live.grad()[0] == 2.0);
}

TEST_CASE("detach cuts the graph") {
  auto a = Tensor::from(1, 1, {2.0}, true);
  const auto b = ad::scale(a, 2.0).detach();
  CHECK(b.is_leaf());
  CHECK_FALSE(b.requires_grad());
  CHECK(b.item() == 4.0);
}

TEST_CASE("weighted_row_combination validates its index lists") {
  auto a = Tensor::from(2, 1, {1.0, 2.0});
  CHECK_THROWS_AS(ad::weighted_row_combination(a, {{0, 5}}, {{1.0, 1.0}}), ShapeError);
  CHECK_THROWS_AS(ad::weighted_row_combination(a, {{0}}, {{1.0, 2.0}}), ShapeError);
  const auto c = ad::weighted_row_combination(a, {{0, 1}, {}}, {{-1.0, 2.0}, {}});
  CHECK(c.at(0, 0) == 3.0);
  CHECK(c.at(1, 0) == 0.0);
}
