/*
 * Copyright 2026 The QCAD Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "error.hpp"
#include "metrics.hpp"
#include "oracles.hpp"
#include "random.hpp"

namespace qcad::eval {
namespace {

using Labels = std::vector<std::uint8_t>;
using Scores = std::vector<double>;

TEST_SUITE("metrics") {

TEST_CASE("ranking ties by index") {
  Scores s{0.5, 0.9, 0.5, 0.1, 0.9};
  CHECK(rank_by_score(s) == std::vector<std::size_t>{1, 4, 0, 2, 3});
}

TEST_CASE("roc auc examples") {
  CHECK(roc_auc(Scores{0.9, 0.8, 0.2, 0.1}, Labels{1, 1, 0, 0}) == 1.0);
  CHECK(roc_auc(Scores{0.1, 0.2, 0.8, 0.9}, Labels{1, 1, 0, 0}) == 0.0);
  CHECK(roc_auc(Scores{0.4, 0.4, 0.4, 0.4}, Labels{1, 0, 1, 0}) == 0.5);
  CHECK(roc_auc(Scores{0.9, 0.8, 0.7, 0.6}, Labels{1, 0, 1, 0}) == 0.75);
  CHECK_THROWS_AS(roc_auc(Scores{1, 2}, Labels{1, 1}), MetricError);
  CHECK_THROWS_AS(roc_auc(Scores{1, 2}, Labels{0, 0}), MetricError);
  CHECK_THROWS_AS(roc_auc(Scores{1, 2}, Labels{0}), ParameterError);
}

TEST_CASE("roc auc equals the pairwise definition exactly") {
  Rng rng(1);
  int done = 0;
  while (done < 500) {
    const std::size_t n = 2 + rng.below(11);
    Scores s(n);
    Labels y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(5)) / 4.0;
      y[i] = rng.coin();
    }
    const auto pos = std::count(y.begin(), y.end(), 1);
    if (pos == 0 || pos == static_cast<long>(n)) continue;
    REQUIRE(roc_auc(s, y) == oracle::roc_auc(s, y));
    ++done;
  }
}

TEST_CASE("roc auc is invariant under increasing transforms") {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    Scores s(30), e(30);
    Labels y(30);
    for (std::size_t i = 0; i < 30; ++i) {
      s[i] = rng.uniform();
      e[i] = std::exp(5 * s[i]) - 3;
      y[i] = i % 3 == 0;
    }
    CHECK(roc_auc(s, y) == roc_auc(e, y));
    CHECK(pr_auc(s, y) == pr_auc(e, y));
    CHECK(precision_at_n(s, y, 10) == precision_at_n(e, y, 10));
  }
}

TEST_CASE("average precision examples") {
  CHECK(pr_auc(Scores{0.9, 0.8, 0.3, 0.1}, Labels{1, 1, 0, 0}) == 1.0);
  CHECK(pr_auc(Scores{0.9, 0.8, 0.3, 0.1}, Labels{0, 1, 0, 0}) == 0.5);
  CHECK(pr_auc(Scores{0.1, 0.2}, Labels{1, 1}) == 1.0);
  // Positives at ranks 1 and 3: (1 + 2/3) / 2.
  CHECK(pr_auc(Scores{0.9, 0.8, 0.7}, Labels{1, 0, 1}) == doctest::Approx(5.0 / 6));
  // Ties by index: the positive at index 1 ranks second.
  CHECK(pr_auc(Scores{0.5, 0.5}, Labels{0, 1}) == 0.5);
  CHECK_THROWS_AS(pr_auc(Scores{1, 2}, Labels{0, 0}), MetricError);
}

TEST_CASE("precision at n examples") {
  CHECK(precision_at_n(Scores{0.9, 0.8, 0.1}, Labels{1, 1, 0}, 2) == 1.0);
  CHECK(precision_at_n(Scores{0.9, 0.8, 0.1}, Labels{1, 0, 1}, 2) == 0.5);
  CHECK(precision_at_n(Scores{0.9, 0.8, 0.1, 0.3}, Labels{1, 0, 1, 0}, 4) == 0.5);
  CHECK_THROWS_AS(precision_at_n(Scores{1, 2}, Labels{0, 1}, 0), ParameterError);
  CHECK_THROWS_AS(precision_at_n(Scores{1, 2}, Labels{0, 1}, 3), ParameterError);
}

TEST_CASE("labels on the top m force precision 1 at n = m") {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    Scores s(40);
    for (double& v : s) v = static_cast<double>(rng.below(10));
    auto order = rank_by_score(s);
    const std::size_t m = 1 + rng.below(20);
    Labels y(40, 0);
    for (std::size_t k = 0; k < m; ++k) y[order[k]] = 1;
    CHECK(precision_at_n(s, y, m) == 1.0);
    CHECK(pr_auc(s, y) == 1.0);
  }
}

TEST_CASE("metrics stay in [0, 1]") {
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    Scores s(25);
    Labels y(25);
    for (std::size_t i = 0; i < 25; ++i) {
      s[i] = rng.normal();
      y[i] = i < 3 || rng.below(4) == 0;
    }
    y[24] = 0;
    for (double v : {roc_auc(s, y), pr_auc(s, y), precision_at_n(s, y, 5)}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

}  // TEST_SUITE

}  // namespace
}  // namespace qcad::eval
