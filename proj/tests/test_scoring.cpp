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
#include <numeric>
#include <vector>

#include <doctest.h>

#include "error.hpp"
#include "gower.hpp"
#include "oracles.hpp"
#include "scoring.hpp"
#include "test_util.hpp"

namespace qcad {
namespace {

using data::Dataset;
using data::FeatureSchema;
using testing::bhv;
using testing::ctx;
using testing::numeric;

std::vector<double> uniform_taus() {
  std::vector<double> t(101);
  for (int i = 0; i <= 100; ++i) t[i] = i / 100.0;
  return t;
}

// Profile with hand-set summary fields; only the fields read by
// intermediate_score matter.
PercentileProfile manual(double tau0, double tau_max, double q25, double q75,
                         double max_width) {
  PercentileProfile p;
  p.taus = {tau0, tau_max};
  p.widths = {tau_max - tau0};
  p.q25 = q25;
  p.q75 = q75;
  p.iqr = q75 - q25;
  p.max_width = max_width;
  return p;
}

qrf::Matrix column_matrix(const std::vector<double>& x) {
  qrf::Matrix m(x.size(), 1);
  for (std::size_t i = 0; i < x.size(); ++i) m(i, 0) = x[i];
  return m;
}

// Contextual x in a tight cluster, Q behavioral features near `level`.
Dataset tight_group(std::size_t n, std::size_t q, double level, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<data::FeatureSpec> specs{ctx("x")};
  std::vector<data::Column> cols;
  std::vector<double> x(n);
  for (double& v : x) v = rng.uniform();
  cols.push_back(numeric(x));
  for (std::size_t j = 0; j < q; ++j) {
    specs.push_back(bhv("b" + std::to_string(j)));
    std::vector<double> b(n);
    for (double& v : b) v = level + rng.uniform(-0.01, 0.01);
    cols.push_back(numeric(b));
  }
  return Dataset(FeatureSchema(specs), cols);
}

Dataset set_behavioral(const Dataset& ds, std::size_t row, std::size_t q, double v) {
  const std::size_t f = ds.schema().behavioral()[q];
  auto col = ds.column(f);
  col.values[row] = v;
  return ds.with_column(f, col);
}

TEST_SUITE("scoring") {

TEST_CASE("profile of a constant group") {
  auto f = qrf::QuantileForest::fit(column_matrix({1, 2, 3, 4}), {0.4, 0.4, 0.4, 0.4},
                                    qrf::ForestParams{}, 1);
  std::vector<double> u{2};
  auto p = percentile_profile(f, u);
  CHECK(p.taus.size() == 101);
  CHECK(std::all_of(p.taus.begin(), p.taus.end(), [](double t) { return t == 0.4; }));
  CHECK(std::all_of(p.widths.begin(), p.widths.end(), [](double w) { return w == 0; }));
  CHECK(p.iqr == 0.0);
  CHECK(p.max_width == 0.0);
}

TEST_CASE("profile of a single leaf over {0, 0.5, 1}") {
  qrf::ForestParams single{.n_trees = 1, .min_samples_split = 100, .bootstrap = false};
  auto f = qrf::QuantileForest::fit(column_matrix({1, 2, 3}), {1.0, 0.0, 0.5}, single, 1);
  std::vector<double> u{2};
  auto p = percentile_profile(f, u);
  CHECK(p.taus[0] == 0.0);
  CHECK(p.taus[50] == 0.5);
  CHECK(p.taus[100] == 1.0);
  CHECK(p.q25 == 0.0);
  CHECK(p.q75 == 1.0);
}

TEST_CASE("profile invariants on random forests") {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    qrf::Matrix x(60, 2);
    for (double& v : x.values) v = rng.uniform();
    std::vector<double> y(60);
    for (double& v : y) v = rng.normal();
    auto f = qrf::QuantileForest::fit(x, y, qrf::ForestParams{.n_trees = 5}, t);
    std::vector<double> u{rng.uniform(), rng.uniform()};
    for (std::size_t nq : {100, 20, 7}) {
      auto p = percentile_profile(f, u, nq);
      REQUIRE(p.taus.size() == nq + 1);
      CHECK(std::is_sorted(p.taus.begin(), p.taus.end()));
      double sum = 0.0;
      for (double w : p.widths) {
        CHECK(w >= 0.0);
        sum += w;
      }
      CHECK(sum == doctest::Approx(p.taus.back() - p.taus.front()).epsilon(1e-12));
      CHECK(p.iqr >= 0.0);
      std::vector<double> q{0.25, 0.75};
      auto quart = f.quantiles(u, q);
      CHECK(p.q25 == quart[0]);
      CHECK(p.q75 == quart[1]);
      if (nq == 100) {
        CHECK(p.q25 == p.taus[25]);
        CHECK(p.q75 == p.taus[75]);
      }
    }
  }
}

TEST_CASE("from_taus requires quartiles on the grid") {
  CHECK_THROWS_AS(PercentileProfile::from_taus({0, 1, 2}), ParameterError);
  CHECK_NOTHROW(PercentileProfile::from_taus({0, 1, 2}, 0.5, 1.5));
  CHECK_THROWS_AS(PercentileProfile::from_taus({0}), ParameterError);
}

TEST_CASE("matched width examples") {
  std::vector<double> t(101);
  for (int i = 0; i <= 46; ++i) t[i] = 0.5 * i / 46.0;
  for (int i = 47; i <= 100; ++i) t[i] = 0.5 + 0.013 * (i - 46);
  auto p = PercentileProfile::from_taus(t);
  CHECK(matched_width(p, 0.505) == doctest::Approx(0.013).epsilon(1e-12));
  CHECK(matched_width(p, t[100]) == p.widths[99]);

  auto u = PercentileProfile::from_taus(uniform_taus());
  CHECK(matched_width(u, 0.314) == doctest::Approx(0.01).epsilon(1e-9));
  CHECK_THROWS_AS(matched_width(u, -0.1), ParameterError);
  CHECK_THROWS_AS(matched_width(u, 1.1), ParameterError);
}

TEST_CASE("matched width under duplicate taus takes the largest index") {
  auto p = PercentileProfile::from_taus({0.0, 0.2, 0.2, 0.2, 0.9});
  // tau_1 = tau_2 = tau_3 = 0.2: b = 0.2 falls in [tau_3, tau_4].
  CHECK(matched_width(p, 0.2) == doctest::Approx(0.7));
  CHECK(matched_width(p, 0.1) == doctest::Approx(0.2));
}

TEST_CASE("intermediate score examples") {
  auto u = PercentileProfile::from_taus(uniform_taus());
  CHECK(intermediate_score(u, 0.314) == matched_width(u, 0.314));

  auto below = manual(0.2, 0.9, 0.3, 0.5, 0.05);
  CHECK(intermediate_score(below, 0.1) == doctest::Approx(0.075).epsilon(1e-12));
  auto above = manual(0.1, 0.8, 0.3, 0.5, 0.04);
  CHECK(intermediate_score(above, 1.0) == doctest::Approx(0.08).epsilon(1e-12));

  // Without scaling the outside branches return the bare maximum width.
  CHECK(intermediate_score(below, 0.1, false) == 0.05);
  CHECK(intermediate_score(above, 1.0, false) == 0.04);
}

TEST_CASE("zero iqr is floored") {
  auto p = manual(0.5, 0.5, 0.5, 0.5, 0.0);
  CHECK(intermediate_score(p, 0.7) == 0.0);
  auto q = manual(0.5, 0.6, 0.55, 0.55, 0.1);
  CHECK(intermediate_score(q, 0.7) == doctest::Approx((1 + 0.1 / kIqrFloor) * 0.1));
}

TEST_CASE("monotone outside the support") {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> taus(101);
    double v = rng.uniform();
    for (double& x : taus) x = (v += rng.uniform() * 0.02);
    auto p = PercentileProfile::from_taus(taus);
    double b = taus[0] - rng.uniform(), b2 = b - rng.uniform();
    CHECK(intermediate_score(p, b2) >= intermediate_score(p, b));
    double c = taus[100] + rng.uniform(), c2 = c + rng.uniform();
    CHECK(intermediate_score(p, c2) >= intermediate_score(p, c));
    double inside = rng.uniform(taus[0], taus[100]);
    CHECK(intermediate_score(p, inside) == oracle::intermediate_score(taus, inside));
  }
}

TEST_CASE("clip examples") {
  CHECK(clip_score(0.15, 10.0) == doctest::Approx(0.10));
  CHECK(clip_score(0.05, 10.0) == 0.05);
  CHECK(clip_score(0.1, 10.0) == 0.1);
  CHECK(clip_score(7.0, std::nullopt) == 7.0);
}

TEST_CASE("parameter validation") {
  QcadParams p;
  CHECK(p.resolved_k(2000) == 500);
  CHECK(p.resolved_k(300) == 150);
  CHECK_NOTHROW(p.validate(10));
  CHECK_THROWS_AS(p.validate(1), ParameterError);
  p.k = 10;
  CHECK_THROWS_AS(p.validate(10), ParameterError);
  CHECK_NOTHROW(p.validate(11));
  p = QcadParams{};
  p.n_q = 0;
  CHECK_THROWS_AS(p.validate(10), ParameterError);
  p = QcadParams{};
  p.n_trees = 0;
  CHECK_THROWS_AS(p.validate(10), ParameterError);
  p = QcadParams{};
  p.eta = 0.0;
  CHECK_THROWS_AS(p.validate(10), ParameterError);
  p.eta = std::nullopt;
  CHECK_NOTHROW(p.validate(10));
}

TEST_CASE("single behavioral feature: final equals partial") {
  auto ds = data::minmax_normalize(testing::random_mixed(30, 2, 1, 1, 6));
  QcadParams p{.k = 10};
  auto scores = score_all(ds, p);
  for (const auto& s : scores) CHECK(s.final_score == s.partial_scores[0]);
}

TEST_CASE("large deviation in a tight group is clipped to eta / 100") {
  auto ds = tight_group(41, 3, 0.5, 7);
  for (std::size_t q = 0; q < 3; ++q) ds = set_behavioral(ds, 0, q, 1.0);
  QcadParams p{.k = 40};
  auto m = gower::distance_matrix(ds);
  auto s = score_object(ds, m, 0, p);
  for (double v : s.partial_scores) CHECK(v == doctest::Approx(0.1));
  CHECK(s.final_score == doctest::Approx(0.1));
}

TEST_CASE("a median object in a dense uniform group scores near the typical width") {
  Rng rng(8);
  const std::size_t n = 401;
  std::vector<double> x(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = 1.0;
    b[i] = rng.uniform();
  }
  b[0] = 0.5;
  // Constant context: every tree is a single leaf over its bootstrap sample,
  // so percentile intervals are about 1/100 wide.
  Dataset ds(FeatureSchema({ctx("x"), bhv("b")}), {numeric(x), numeric(b)});
  QcadParams p{.k = 400};
  auto s = score_object(ds, gower::distance_matrix(ds), 0, p);
  CHECK(s.final_score > 0.0);
  CHECK(s.final_score < 0.04);
}

TEST_CASE("one extreme feature scores less than all extreme features") {
  const std::size_t q = 4;
  auto base = tight_group(61, q, 0.5, 9);
  for (std::size_t j = 0; j < q; ++j) base = set_behavioral(base, 0, j, 0.5);
  QcadParams p{.k = 60};
  auto one = set_behavioral(base, 0, 0, 1.0);
  auto all = base;
  for (std::size_t j = 0; j < q; ++j) all = set_behavioral(all, 0, j, 1.0);
  auto m = gower::distance_matrix(base);
  auto s1 = score_object(one, m, 0, p);
  auto sa = score_object(all, m, 0, p);
  CHECK(s1.partial_scores[0] == doctest::Approx(0.1));
  double rest = 0.0;
  for (std::size_t j = 1; j < q; ++j) rest += s1.partial_scores[j];
  CHECK(s1.final_score == doctest::Approx((0.1 + rest) / q).epsilon(1e-12));
  CHECK(s1.final_score < sa.final_score);
  CHECK(sa.final_score == doctest::Approx(0.1));
}

TEST_CASE("two objects, k = 1") {
  Dataset ds(FeatureSchema({ctx("x"), bhv("b")}), {numeric({0, 1}), numeric({0.2, 0.7})});
  auto s = score_all(ds, QcadParams{.k = 1});
  REQUIRE(s.size() == 2);
  CHECK(s[0].reference_group.members == std::vector<std::size_t>{1});
  CHECK(s[1].reference_group.members == std::vector<std::size_t>{0});
  // A single training value: every tau equals it, so any other value is
  // outside the support with zero max width.
  CHECK(s[0].final_score == 0.0);
}

TEST_CASE("scores are bounded and final is the mean of partials") {
  auto ds = data::minmax_normalize(testing::random_mixed(80, 2, 2, 3, 10));
  for (auto eta : {std::optional<double>(10.0), std::optional<double>(3.0)}) {
    QcadParams p{.k = 20, .eta = eta};
    for (const auto& s : score_all(ds, p)) {
      double sum = 0.0;
      for (double v : s.partial_scores) {
        CHECK(v >= 0.0);
        CHECK(v <= *eta / 100.0);
        sum += v;
      }
      CHECK(std::abs(s.final_score - sum / 3.0) <= 1e-12);
      CHECK(s.reference_group.members.size() == 20);
    }
  }
}

TEST_CASE("determinism across runs and thread counts") {
  auto ds = data::minmax_normalize(testing::random_mixed(70, 2, 1, 2, 11));
  QcadParams p{.k = 15, .seed = 5};
  auto a = score_all(ds, p);
  auto b = score_all(ds, p);
  p.threads = 3;
  auto c = score_all(ds, p);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].partial_scores == b[i].partial_scores);
    CHECK(a[i].partial_scores == c[i].partial_scores);
    CHECK(a[i].reference_group.members == c[i].reference_group.members);
  }
  p.seed = 6;
  auto d = score_all(ds, p);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i].final_score != d[i].final_score;
  CHECK(differs);
}

TEST_CASE("permuting rows permutes the scores") {
  auto ds = data::minmax_normalize(testing::random_mixed(60, 3, 0, 2, 12));
  QcadParams p{.k = 12, .seed = 3};
  auto base = score_all(ds, p);
  std::vector<std::size_t> perm(ds.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(13);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  auto shuffled = ds.select_rows(perm);
  auto s = score_all(shuffled, p);
  for (std::size_t j = 0; j < perm.size(); ++j) {
    CHECK(s[j].partial_scores == base[perm[j]].partial_scores);
    std::vector<std::size_t> mapped;
    for (auto r : s[j].reference_group.members) mapped.push_back(perm[r]);
    CHECK(mapped == base[perm[j]].reference_group.members);
  }
}

TEST_CASE("variants share forests but match separate runs") {
  auto ds = data::minmax_normalize(testing::random_mixed(50, 2, 1, 2, 14));
  QcadParams p{.k = 10, .seed = 2};
  auto m = gower::distance_matrix(ds);
  std::vector<ScoreVariant> variants{{10.0, true}, {std::nullopt, true}, {10.0, false},
                                     {1.0, true}};
  auto all = score_all_variants(ds, m, p, variants);
  REQUIRE(all.size() == variants.size());
  for (std::size_t v = 0; v < variants.size(); ++v) {
    QcadParams pv = p;
    pv.eta = variants[v].eta;
    pv.scaling = variants[v].scaling;
    auto single = score_all(ds, m, pv);
    for (std::size_t i = 0; i < single.size(); ++i)
      CHECK(all[v][i].partial_scores == single[i].partial_scores);
  }
}

TEST_CASE("object errors carry the index") {
  auto ds = data::minmax_normalize(testing::random_mixed(10, 1, 0, 1, 1));
  auto m = gower::distance_matrix(testing::random_mixed(9, 1, 0, 1, 1));
  CHECK_THROWS_AS(score_all(ds, m, QcadParams{.k = 3}), ParameterError);
}

}  // TEST_SUITE

}  // namespace
}  // namespace qcad
