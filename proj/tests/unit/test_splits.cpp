#include <doctest.h>

#include <algorithm>
#include <set>

#include "locfair/data/splits.hpp"
#include "locfair/error.hpp"

using namespace locfair;

TEST_CASE("ten rows at fraction 0.2 split eight to two") {
  const auto s = data::split_indices(10, 0.2, 1);
  CHECK(s.train.size() == 8);
  CHECK(s.test.size() == 2);
}

TEST_CASE("split is a disjoint exhaustive partition, deterministic under the seed") {
  for (std::uint64_t seed : {0u, 1u, 99u}) {
    const auto s = data::split_indices(137, 0.3, seed);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    for (auto i : s.test) CHECK(all.insert(i).second);
    CHECK(all.size() == 137);
    CHECK(*all.rbegin() == 136);
    const auto again = data::split_indices(137, 0.3, seed);
    CHECK(again.train == s.train);
    CHECK(again.test == s.test);
  }
  CHECK(data::split_indices(137, 0.3, 1).test != data::split_indices(137, 0.3, 2).test);
}

TEST_CASE("degenerate splits are rejected") {
  CHECK_THROWS_AS(data::split_indices(10, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(data::split_indices(10, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(data::split_indices(1, 0.5, 1), ConfigError);
  CHECK_THROWS_AS(data::split_indices(3, 0.01, 1), ConfigError);
}

TEST_CASE("five folds on 100 rows give five disjoint 20-row test sets covering every row") {
  const auto folds = data::kfold_indices(100, 5, 7);
  REQUIRE(folds.size() == 5);
  std::set<std::size_t> seen;
  for (const auto& f : folds) {
    CHECK(f.test.size() == 20);
    CHECK(f.train.size() == 80);
    for (auto i : f.test) {
      CHECK(seen.insert(i).second);
      CHECK_FALSE(std::binary_search(f.train.begin(), f.train.end(), i));
    }
  }
  CHECK(seen.size() == 100);
}

TEST_CASE("uneven fold sizes differ by at most one") {
  const auto folds = data::kfold_indices(23, 5, 3);
  std::vector<std::size_t> sizes;
  for (const auto& f : folds) sizes.push_back(f.test.size());
  CHECK(sizes == std::vector<std::size_t>{5, 5, 5, 4, 4});
  CHECK_THROWS_AS(data::kfold_indices(3, 5, 1), ConfigError);
  CHECK_THROWS_AS(data::kfold_indices(10, 1, 1), ConfigError);
}
