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

#include "scoring.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"
#include "parallel.hpp"

namespace qcad {

PercentileProfile PercentileProfile::from_taus(std::vector<double> taus,
                                               std::optional<double> q25,
                                               std::optional<double> q75) {
  if (taus.size() < 2)
    throw ParameterError("profile: need at least two quantile levels");
  PercentileProfile p;
  const std::size_t n_q = taus.size() - 1;
  if (!q25 || !q75) {
    if (n_q % 4 != 0)
      throw ParameterError("profile: quartiles not on a grid of size " +
                           std::to_string(n_q));
    q25 = taus[n_q / 4];
    q75 = taus[3 * n_q / 4];
  }
  p.taus = std::move(taus);
  p.widths.resize(n_q);
  for (std::size_t i = 0; i < n_q; ++i) p.widths[i] = p.taus[i + 1] - p.taus[i];
  p.q25 = *q25;
  p.q75 = *q75;
  p.iqr = p.q75 - p.q25;
  p.max_width = *std::max_element(p.widths.begin(), p.widths.end());
  return p;
}

PercentileProfile percentile_profile(const qrf::QuantileForest& forest,
                                     std::span<const double> u,
                                     std::size_t n_q) {
  if (n_q < 1) throw ParameterError("profile: n_q must be >= 1");
  // Grid levels plus the two quartiles, queried in one ascending pass.
  std::vector<double> alphas;
  alphas.reserve(n_q + 3);
  for (std::size_t i = 0; i <= n_q; ++i)
    alphas.push_back(static_cast<double>(i) / static_cast<double>(n_q));
  alphas.push_back(0.25);
  alphas.push_back(0.75);
  std::vector<std::size_t> order(alphas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return alphas[a] < alphas[b]; });
  std::vector<double> sorted(alphas.size());
  for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = alphas[order[i]];

  const auto values = forest.quantiles(u, sorted);
  std::vector<double> by_level(alphas.size());
  for (std::size_t i = 0; i < order.size(); ++i) by_level[order[i]] = values[i];

  const double q25 = by_level[n_q + 1];
  const double q75 = by_level[n_q + 2];
  by_level.resize(n_q + 1);
  return PercentileProfile::from_taus(std::move(by_level), q25, q75);
}

double matched_width(const PercentileProfile& p, double b) {
  if (b < p.taus.front() || b > p.taus.back())
    throw ParameterError("matched_width: value outside [tau_0, tau_max]");
  const auto it = std::upper_bound(p.taus.begin(), p.taus.end(), b);
  auto i = static_cast<std::size_t>(it - p.taus.begin()) - 1;
  i = std::min(i, p.widths.size() - 1);
  return p.widths[i];
}

double intermediate_score(const PercentileProfile& p, double b, bool scaling) {
  const double lo = p.taus.front();
  const double hi = p.taus.back();
  if (b >= lo && b <= hi) return matched_width(p, b);
  if (!scaling) return p.max_width;
  const double iqr = std::max(p.iqr, kIqrFloor);
  const double excess = b < lo ? lo - b : b - hi;
  return (1.0 + excess / iqr) * p.max_width;
}

double clip_score(double score, std::optional<double> eta) {
  if (!eta) return score;
  return std::min(score, *eta / 100.0);
}

std::size_t QcadParams::resolved_k(std::size_t n) const {
  if (k != 0) return k;
  return std::min<std::size_t>(n / 2, 500);
}

void QcadParams::validate(std::size_t n) const {
  if (n < 2) throw ParameterError("qcad: at least two objects are required");
  const std::size_t kk = resolved_k(n);
  if (kk < 1 || kk > n - 1)
    throw ParameterError("qcad: k=" + std::to_string(kk) + " must lie in [1, " +
                         std::to_string(n - 1) + "]");
  if (n_q < 1) throw ParameterError("qcad: n_q must be >= 1");
  if (n_trees < 1) throw ParameterError("qcad: number of trees must be >= 1");
  if (min_samples_split < 1)
    throw ParameterError("qcad: min_samples_split must be >= 1");
  if (eta && !(*eta > 0.0)) throw ParameterError("qcad: eta must be > 0");
}

qrf::ForestParams QcadParams::forest_params() const {
  qrf::ForestParams fp;
  fp.n_trees = n_trees;
  fp.max_features = max_features;
  fp.min_samples_split = min_samples_split;
  return fp;
}

std::uint64_t forest_seed(std::uint64_t seed, std::uint64_t row_id,
                          std::size_t q) {
  return sub_seed(sub_seed(seed, row_id), q);
}

std::vector<double> contextual_row(const data::Dataset& ds, std::size_t i) {
  std::vector<double> u(ds.contextual_count());
  for (std::size_t p = 0; p < u.size(); ++p) u[p] = ds.contextual(i, p);
  return u;
}

namespace {

qrf::SortedPredictors group_predictors(const data::Dataset& ds,
                                       const gower::ReferenceGroup& group) {
  const std::size_t p_count = ds.contextual_count();
  qrf::Matrix x(group.members.size(), p_count);
  for (std::size_t r = 0; r < group.members.size(); ++r)
    for (std::size_t p = 0; p < p_count; ++p)
      x(r, p) = ds.contextual(group.members[r], p);
  return qrf::SortedPredictors(std::move(x));
}

qrf::QuantileForest fit_with(const qrf::SortedPredictors& x,
                             const data::Dataset& ds,
                             const gower::ReferenceGroup& group, std::size_t q,
                             const QcadParams& params) {
  std::vector<double> y(group.members.size());
  for (std::size_t r = 0; r < y.size(); ++r)
    y[r] = ds.behavioral(group.members[r], q);
  return qrf::QuantileForest::fit(
      x, std::move(y), params.forest_params(),
      forest_seed(params.seed, ds.row_ids()[group.center], q));
}

}  // namespace

qrf::QuantileForest fit_group_forest(const data::Dataset& ds,
                                     const gower::ReferenceGroup& group,
                                     std::size_t q, const QcadParams& params) {
  if (group.members.empty())
    throw DataError("qcad: empty reference group for object " +
                    std::to_string(group.center));
  return fit_with(group_predictors(ds, group), ds, group, q, params);
}

ObjectProfiles object_profiles(const data::Dataset& ds,
                               const gower::DistanceMatrix& m, std::size_t i,
                               const QcadParams& params) {
  ObjectProfiles out;
  out.reference_group = gower::reference_group(m, i, params.resolved_k(ds.size()));
  if (out.reference_group.members.empty())
    throw DataError("qcad: empty reference group for object " + std::to_string(i));
  const auto x = group_predictors(ds, out.reference_group);
  const auto u = contextual_row(ds, i);
  for (std::size_t q = 0; q < ds.behavioral_count(); ++q) {
    const auto forest = fit_with(x, ds, out.reference_group, q, params);
    out.profiles.push_back(percentile_profile(forest, u, params.n_q));
  }
  return out;
}

ObjectScore score_profiles(const data::Dataset& ds, std::size_t i,
                           const ObjectProfiles& profiles,
                           const ScoreVariant& variant) {
  ObjectScore out;
  out.index = i;
  out.reference_group = profiles.reference_group;
  const std::size_t q_count = profiles.profiles.size();
  out.partial_scores.resize(q_count);
  double total = 0.0;
  for (std::size_t q = 0; q < q_count; ++q) {
    const double raw = intermediate_score(profiles.profiles[q],
                                          ds.behavioral(i, q), variant.scaling);
    out.partial_scores[q] = clip_score(raw, variant.eta);
    total += out.partial_scores[q];
  }
  out.final_score = total / static_cast<double>(q_count);
  return out;
}

ObjectScore score_object(const data::Dataset& ds,
                         const gower::DistanceMatrix& m, std::size_t i,
                         const QcadParams& params) {
  return score_profiles(ds, i, object_profiles(ds, m, i, params),
                        {params.eta, params.scaling});
}

std::vector<std::vector<ObjectScore>> score_all_variants(
    const data::Dataset& ds, const gower::DistanceMatrix& m,
    const QcadParams& params, std::span<const ScoreVariant> variants) {
  params.validate(ds.size());
  for (const auto& v : variants)
    if (v.eta && !(*v.eta > 0.0)) throw ParameterError("qcad: eta must be > 0");
  if (m.size() != ds.size())
    throw ParameterError("qcad: distance matrix size does not match dataset");
  std::vector<std::vector<ObjectScore>> scores(
      variants.size(), std::vector<ObjectScore>(ds.size()));
  parallel_for(ds.size(), params.threads, [&](std::size_t i) {
    try {
      const auto profiles = object_profiles(ds, m, i, params);
      for (std::size_t v = 0; v < variants.size(); ++v)
        scores[v][i] = score_profiles(ds, i, profiles, variants[v]);
    } catch (const ParameterError& e) {
      throw ParameterError("object " + std::to_string(i) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("object " + std::to_string(i) + ": " + e.what());
    }
  });
  return scores;
}

std::vector<ObjectScore> score_all(const data::Dataset& ds,
                                   const gower::DistanceMatrix& m,
                                   const QcadParams& params) {
  const ScoreVariant variant{params.eta, params.scaling};
  return std::move(score_all_variants(ds, m, params, {&variant, 1}).front());
}

std::vector<ObjectScore> score_all(const data::Dataset& ds,
                                   const QcadParams& params) {
  params.validate(ds.size());
  return score_all(ds, gower::distance_matrix(ds, params.threads), params);
}

}  // namespace qcad
