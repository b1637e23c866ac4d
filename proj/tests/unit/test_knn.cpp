#include <doctest.h>

#include "gradcheck.hpp"
#include "locfair/error.hpp"
#include "locfair/losses/knn.hpp"
#include "oracles.hpp"

using namespace locfair;

TEST_CASE("nearest same-label neighbours on a line") {
  const std::vector<double> x = {0.0, 1.0, 3.0, 10.0, 2.0};
  const std::vector<int> y = {1, 1, 1, -1, -1};
  const auto r = losses::knn_same_label(x, 1, y, 2);
  CHECK(r.neighbors[0] == std::vector<std::size_t>{1, 2});
  CHECK(r.neighbors[2] == std::vector<std::size_t>{1, 0});
  CHECK(r.neighbors[3] == std::vector<std::size_t>{4});
  CHECK(r.shortfall_rows == 2);
}

TEST_CASE("equidistant candidates are ordered by index") {
  const std::vector<double> x = {0.0, 1.0, -1.0, 2.0, -2.0};
  const std::vector<int> y(5, 1);
  const auto r = losses::knn_same_label(x, 1, y, 4);
  CHECK(r.neighbors[0] == std::vector<std::size_t>{1, 2, 3, 4});
}

TEST_CASE("a row never lists itself, even when duplicated") {
  const std::vector<double> x = {5.0, 5.0, 5.0};
  const std::vector<int> y = {1, 1, 1};
  const auto r = losses::knn_same_label(x, 1, y, 2);
  CHECK(r.neighbors[1] == std::vector<std::size_t>{0, 2});
}

TEST_CASE("matches the exhaustive oracle on random integer grids with many ties") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const auto n = std::uniform_int_distribution<std::size_t>(1, 60)(rng);
    const auto dim = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
    const auto k = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    std::vector<double> pts(n * dim);
    for (double& v : pts) v = std::uniform_int_distribution<int>(-2, 2)(rng);
    const auto y = testsupport::random_labels(n, rng);
    INFO("trial ", trial, " n ", n, " dim ", dim, " k ", k);
    CHECK(losses::knn_same_label(pts, dim, y, k).neighbors ==
          testsupport::brute_force_knn(pts, dim, y, k));
  }
}

TEST_CASE("invalid arguments") {
  const std::vector<double> x = {0.0, 1.0};
  const std::vector<int> y = {1, 1};
  CHECK_THROWS_AS(losses::knn_same_label(x, 1, y, 0), ConfigError);
  CHECK_THROWS_AS(losses::knn_same_label(x, 3, y, 1), ShapeError);
}
