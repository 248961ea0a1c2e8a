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
#include <limits>
#include <map>
#include <vector>

#include <doctest.h>

#include "error.hpp"
#include "oracles.hpp"
#include "qrf.hpp"

namespace qcad::qrf {
namespace {

Matrix column_matrix(const std::vector<double>& x) {
  Matrix m(x.size(), 1);
  for (std::size_t i = 0; i < x.size(); ++i) m(i, 0) = x[i];
  return m;
}

Matrix random_matrix(std::size_t n, std::size_t d, Rng& rng) {
  Matrix m(n, d);
  for (double& v : m.values) v = rng.uniform();
  return m;
}

ForestParams no_bootstrap(std::size_t n_s) {
  ForestParams p;
  p.n_trees = 1;
  p.min_samples_split = n_s;
  p.bootstrap = false;
  return p;
}

struct Split {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double sse = 0.0;
};

double sse_of(const std::vector<double>& y) {
  if (y.empty()) return 0.0;
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double s = 0.0;
  for (double v : y) s += (v - mean) * (v - mean);
  return s;
}

// Tries every midpoint of every feature over the given rows and keeps the
// split with the smallest total SSE.
Split best_split(const Matrix& x, const std::vector<double>& y,
                 const std::vector<std::size_t>& rows) {
  Split best;
  std::vector<double> ys;
  for (auto r : rows) ys.push_back(y[r]);
  best.sse = sse_of(ys);
  for (std::size_t f = 0; f < x.cols; ++f) {
    std::vector<double> vals;
    for (auto r : rows) vals.push_back(x(r, f));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
      double thr = (vals[k] + vals[k + 1]) / 2.0;
      std::vector<double> l, r;
      for (auto row : rows) (x(row, f) <= thr ? l : r).push_back(y[row]);
      double s = sse_of(l) + sse_of(r);
      if (s < best.sse - 1e-12) {
        best = {true, f, thr, s};
      }
    }
  }
  return best;
}

TEST_SUITE("qrf") {

TEST_CASE("single row gives a single leaf") {
  Rng rng(1);
  SortedPredictors x(column_matrix({0.5}));
  std::vector<double> y{2.0};
  auto tree = fit_tree(x, y, ForestParams{}, rng);
  REQUIRE(tree.nodes().size() == 1);
  CHECK(tree.nodes()[0].is_leaf());
  CHECK(tree.leaf_samples() == std::vector<std::uint32_t>{0});
}

TEST_CASE("constant response gives a single leaf") {
  Rng rng(2);
  Rng data(3);
  SortedPredictors x(random_matrix(100, 3, data));
  std::vector<double> y(100, 0.4);
  auto tree = fit_tree(x, y, ForestParams{.min_samples_split = 2}, rng);
  CHECK(tree.nodes().size() == 1);
  CHECK(tree.leaf_samples().size() == 100);
}

TEST_CASE("y = x splits between the two middle values") {
  std::vector<double> xs, ys;
  for (int i = 0; i < 20; ++i) {
    xs.push_back(i * 1.5);
    ys.push_back(i * 1.5);
  }
  Rng rng(4);
  auto tree = fit_tree(SortedPredictors(column_matrix(xs)), ys, no_bootstrap(10), rng);
  const auto& root = tree.nodes()[0];
  REQUIRE_FALSE(root.is_leaf());
  CHECK(root.threshold > xs[9]);
  CHECK(root.threshold < xs[10]);
  CHECK(root.threshold == doctest::Approx((xs[9] + xs[10]) / 2));
}

TEST_CASE("every split equals the exhaustive scan") {
  Rng data(5);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 30 + data.below(40), d = 1 + data.below(3);
    Matrix x = random_matrix(n, d, data);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i)
      y[i] = std::sin(6 * x(i, 0)) + (d > 1 ? x(i, 1) : 0.0) + 0.1 * data.uniform();
    const std::size_t n_s = 2 + data.below(8);
    Rng rng(t);
    auto tree = fit_tree(SortedPredictors(x), y, no_bootstrap(n_s), rng);

    // Rows reaching each node.
    std::map<std::size_t, std::vector<std::size_t>> at;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t node = 0;
      at[node].push_back(i);
      while (!tree.nodes()[node].is_leaf()) {
        const auto& nd = tree.nodes()[node];
        node = x(i, static_cast<std::size_t>(nd.feature)) <= nd.threshold ? nd.left
                                                                           : nd.right;
        at[node].push_back(i);
      }
    }
    for (const auto& [node, rows] : at) {
      const auto& nd = tree.nodes()[node];
      auto best = best_split(x, y, rows);
      if (nd.is_leaf()) {
        // Small, pure or unsplittable.
        CHECK((rows.size() < n_s || !best.found ||
               best.sse >= sse_of([&] {
                 std::vector<double> v;
                 for (auto r : rows) v.push_back(y[r]);
                 return v;
               }()) * (1 - 1e-9)));
        CHECK(tree.samples(nd).size() == rows.size());
      } else {
        REQUIRE(best.found);
        // Equal-SSE splits on different features are legitimate ties.
        const auto f = static_cast<std::size_t>(nd.feature);
        std::vector<double> l, r, vals;
        for (auto row : rows) {
          (x(row, f) <= nd.threshold ? l : r).push_back(y[row]);
          vals.push_back(x(row, f));
        }
        CHECK(sse_of(l) + sse_of(r) <= best.sse + 1e-9);
        std::sort(vals.begin(), vals.end());
        auto hi = std::upper_bound(vals.begin(), vals.end(), nd.threshold);
        REQUIRE(hi != vals.begin());
        REQUIRE(hi != vals.end());
        CHECK(nd.threshold == doctest::Approx((*(hi - 1) + *hi) / 2).epsilon(1e-12));
        if (f == best.feature)
          CHECK(nd.threshold == doctest::Approx(best.threshold).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("leaves hold the bootstrap sample with multiplicity") {
  Rng data(6);
  Matrix x = random_matrix(50, 2, data);
  std::vector<double> y(50);
  for (double& v : y) v = data.uniform();
  auto f = QuantileForest::fit(x, y, ForestParams{.n_trees = 5, .min_samples_split = 4}, 9);
  for (const auto& tree : f.trees()) {
    std::vector<std::uint32_t> seen(50, 0);
    std::uint32_t total = 0;
    for (const auto& nd : tree.nodes()) {
      if (!nd.is_leaf()) continue;
      CHECK(nd.end > nd.begin);
      for (auto s : tree.samples(nd)) ++seen[s];
    }
    CHECK(seen == tree.bootstrap_counts());
    for (auto c : seen) total += c;
    CHECK(total == 50);
  }
}

TEST_CASE("forest determinism") {
  Rng data(7);
  Matrix x = random_matrix(80, 2, data);
  std::vector<double> y(80);
  for (std::size_t i = 0; i < 80; ++i) y[i] = x(i, 0) + data.normal(0, 0.3);
  ForestParams p{.n_trees = 10};
  auto a = QuantileForest::fit(x, y, p, 11);
  auto b = QuantileForest::fit(x, y, p, 11);
  auto c = QuantileForest::fit(x, y, p, 12);
  std::vector<double> alphas;
  for (int i = 0; i <= 100; ++i) alphas.push_back(i / 100.0);
  bool differs = false;
  for (double u0 : {0.1, 0.5, 0.9}) {
    std::vector<double> u{u0, 0.5};
    CHECK(a.quantiles(u, alphas) == b.quantiles(u, alphas));
    CHECK(a.leaf_weights(u) == b.leaf_weights(u));
    differs |= a.quantiles(u, alphas) != c.quantiles(u, alphas);
  }
  CHECK(differs);
}

TEST_CASE("one-tree forest matches its tree") {
  Rng data(8);
  Matrix x = random_matrix(40, 2, data);
  std::vector<double> y(40);
  for (double& v : y) v = data.uniform();
  auto f = QuantileForest::fit(x, y, ForestParams{.n_trees = 1, .min_samples_split = 5}, 3);
  const auto& tree = f.trees().at(0);
  std::vector<double> u{0.3, 0.7};
  const auto& leaf = tree.nodes()[tree.route(u)];
  std::vector<double> expect(40, 0.0);
  for (auto s : tree.samples(leaf)) expect[s] += 1.0 / tree.samples(leaf).size();
  auto w = f.leaf_weights(u);
  for (std::size_t i = 0; i < 40; ++i) CHECK(w[i] == doctest::Approx(expect[i]));
}

TEST_CASE("single leaf of four distinct samples") {
  auto f = QuantileForest::fit(column_matrix({1, 2, 3, 4}), {5, 6, 7, 8},
                               no_bootstrap(100), 1);
  std::vector<double> u{2.5};
  CHECK(f.leaf_weights(u) == std::vector<double>{0.25, 0.25, 0.25, 0.25});
}

TEST_CASE("weights from leaves {i} and {i, j} average to 0.75 / 0.25") {
  // Two rows, two trees, no splitting: a tree whose bootstrap drew row 0
  // twice has leaf {0, 0}; a tree that drew both rows has leaf {0, 1}.
  bool found = false;
  for (std::uint64_t seed = 0; seed < 200 && !found; ++seed) {
    auto f = QuantileForest::fit(column_matrix({0, 1}), {0, 1},
                                 ForestParams{.n_trees = 2, .min_samples_split = 3}, seed);
    const auto& c0 = f.trees()[0].bootstrap_counts();
    const auto& c1 = f.trees()[1].bootstrap_counts();
    if (c0 == std::vector<std::uint32_t>{2, 0} && c1 == std::vector<std::uint32_t>{1, 1}) {
      found = true;
      std::vector<double> u{0.0};
      CHECK(f.leaf_weights(u) == std::vector<double>{0.75, 0.25});
    }
  }
  CHECK(found);
}

TEST_CASE("leaf weights equal the routing oracle") {
  Rng data(10);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 5 + data.below(20), d = 1 + data.below(3);
    Matrix x(n, d);
    // Coarse grid so that duplicate predictor values occur.
    for (double& v : x.values) v = static_cast<double>(data.below(6)) / 5.0;
    std::vector<double> y(n);
    for (double& v : y) v = data.uniform();
    ForestParams p{.n_trees = 1 + data.below(3),
                   .max_features = data.below(d + 1),
                   .min_samples_split = 2 + data.below(3)};
    auto f = QuantileForest::fit(x, y, p, data.next());
    for (int q = 0; q < 10; ++q) {
      std::vector<double> u(d);
      for (double& v : u) v = data.uniform(-0.2, 1.2);
      auto w = f.leaf_weights(u);
      auto ref = oracle::leaf_weights(f, u);
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(w[i] - ref[i]) <= 1e-12);
        CHECK(w[i] >= 0.0);
        sum += w[i];
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("dimension mismatch is rejected") {
  auto f = QuantileForest::fit(column_matrix({1, 2, 3}), {1, 2, 3}, ForestParams{}, 1);
  std::vector<double> u{1.0, 2.0};
  CHECK_THROWS_AS(f.leaf_weights(u), ParameterError);
  CHECK_THROWS_AS(QuantileForest::fit(column_matrix({1, 2}), {1}, ForestParams{}, 1),
                  ParameterError);
  CHECK_THROWS_AS(QuantileForest::fit(column_matrix({1, 2}), {1, 2},
                                      ForestParams{.n_trees = 0}, 1),
                  ParameterError);
}

TEST_CASE("cdf of a single leaf") {
  auto f = QuantileForest::fit(column_matrix({1, 2, 3, 4, 5}), {10, 20, 30, 40, 50},
                               no_bootstrap(100), 1);
  std::vector<double> u{3};
  CHECK(f.cdf(u, 5) == 0.0);
  CHECK(f.cdf(u, 30) == doctest::Approx(0.6));
  CHECK(f.cdf(u, 34) == f.cdf(u, 30));
  CHECK(f.cdf(u, 50) == doctest::Approx(1.0));
  CHECK(f.cdf(u, 1e9) == doctest::Approx(1.0));
}

TEST_CASE("quantiles of a single leaf") {
  auto f = QuantileForest::fit(column_matrix({1, 2, 3, 4, 5}), {50, 40, 30, 20, 10},
                               no_bootstrap(100), 1);
  std::vector<double> u{3};
  std::vector<double> alphas{0.0, 0.2, 0.5, 0.6, 1.0};
  CHECK(f.quantiles(u, alphas) == std::vector<double>{10, 10, 30, 30, 50});
}

TEST_CASE("quantile and cdf properties") {
  Rng data(12);
  Matrix x = random_matrix(200, 2, data);
  std::vector<double> y(200);
  for (std::size_t i = 0; i < 200; ++i) y[i] = x(i, 0) * 3 + data.normal();
  auto f = QuantileForest::fit(x, y, ForestParams{.n_trees = 8}, 4);
  std::vector<double> alphas;
  for (int i = 0; i <= 100; ++i) alphas.push_back(i / 100.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> u{data.uniform(), data.uniform()};
    auto qs = f.quantiles(u, alphas);
    CHECK(std::is_sorted(qs.begin(), qs.end()));
    for (std::size_t i = 1; i < alphas.size(); ++i)
      CHECK(f.cdf(u, qs[i]) >= alphas[i] - 1e-12);
    auto w = f.leaf_weights(u);
    double min_pos = std::numeric_limits<double>::infinity(), max_pos = -min_pos;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i] > 0) {
        min_pos = std::min(min_pos, y[i]);
        max_pos = std::max(max_pos, y[i]);
      }
    CHECK(qs.front() == min_pos);
    CHECK(qs.back() == max_pos);
    double prev = 0.0;
    for (double v = -5; v < 8; v += 0.25) {
      double c = f.cdf(u, v);
      CHECK(c >= prev);
      prev = c;
    }
  }
}

}  // TEST_SUITE

}  // namespace
}  // namespace qcad::qrf
