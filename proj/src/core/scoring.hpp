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

#ifndef QCAD_CORE_SCORING_HPP_
#define QCAD_CORE_SCORING_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dataset.hpp"
#include "gower.hpp"
#include "qrf.hpp"

namespace qcad {

// Estimated conditional quantiles tau_0..tau_nq at levels i/nq (nq = 100 gives
// percentiles) together with the quantities the score needs.
struct PercentileProfile {
  std::vector<double> taus;
  std::vector<double> widths;  // widths[i] = taus[i + 1] - taus[i]
  double q25 = 0.0;
  double q75 = 0.0;
  double iqr = 0.0;
  double max_width = 0.0;

  // Builds the derived fields. With an empty q25/q75 the quartiles are read
  // from taus, which requires the grid size to be a multiple of 4.
  static PercentileProfile from_taus(std::vector<double> taus,
                                     std::optional<double> q25 = std::nullopt,
                                     std::optional<double> q75 = std::nullopt);

  std::size_t grid_size() const { return widths.size(); }
};

PercentileProfile percentile_profile(const qrf::QuantileForest& forest,
                                     std::span<const double> u,
                                     std::size_t n_q = 100);

// Width of the interval [tau_i, tau_i+1] containing b, where i is the largest
// index with tau_i <= b, capped at nq - 1. Throws ParameterError when b lies
// outside [tau_0, tau_nq].
double matched_width(const PercentileProfile& p, double b);

// Smallest IQR used when extrapolating beyond the estimated support.
inline constexpr double kIqrFloor = 1e-6;

// Matched width inside [tau_0, tau_nq]; outside it, the maximum width scaled
// by 1 + distance / IQR. With `scaling` off the outside branches return the
// bare maximum width.
double intermediate_score(const PercentileProfile& p, double b,
                          bool scaling = true);

// min(score, eta / 100); no-op without eta.
double clip_score(double score, std::optional<double> eta);

struct QcadParams {
  std::size_t k = 0;  // 0: min(floor(N / 2), 500)
  std::size_t n_q = 100;
  std::size_t n_trees = 10;
  std::size_t max_features = 0;  // 0: all contextual features
  std::size_t min_samples_split = 10;
  std::optional<double> eta = 10.0;  // empty: no clipping
  bool scaling = true;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  std::size_t resolved_k(std::size_t n) const;
  // Throws ParameterError for any value out of range for a dataset of n rows.
  void validate(std::size_t n) const;
  qrf::ForestParams forest_params() const;
};

struct ObjectScore {
  std::size_t index = 0;
  gower::ReferenceGroup reference_group;
  std::vector<double> partial_scores;  // one per behavioral feature
  double final_score = 0.0;
};

// Seed of the forest for (row id, behavioral feature).
std::uint64_t forest_seed(std::uint64_t seed, std::uint64_t row_id,
                          std::size_t q);

// Forest trained on the reference group: contextual predictors, behavioral
// feature q as response.
qrf::QuantileForest fit_group_forest(const data::Dataset& ds,
                                     const gower::ReferenceGroup& group,
                                     std::size_t q, const QcadParams& params);

std::vector<double> contextual_row(const data::Dataset& ds, std::size_t i);

ObjectScore score_object(const data::Dataset& ds,
                         const gower::DistanceMatrix& m, std::size_t i,
                         const QcadParams& params);

// Reference group of object i and its percentile profile per behavioral
// feature.
struct ObjectProfiles {
  gower::ReferenceGroup reference_group;
  std::vector<PercentileProfile> profiles;
};
ObjectProfiles object_profiles(const data::Dataset& ds,
                               const gower::DistanceMatrix& m, std::size_t i,
                               const QcadParams& params);

// Post-forest settings. Variants of one run share every fitted forest.
struct ScoreVariant {
  std::optional<double> eta = 10.0;
  bool scaling = true;
};

ObjectScore score_profiles(const data::Dataset& ds, std::size_t i,
                           const ObjectProfiles& profiles,
                           const ScoreVariant& variant);

// result[v][i] equals score_all with params.eta / params.scaling replaced by
// variants[v], at the cost of a single set of forests.
std::vector<std::vector<ObjectScore>> score_all_variants(
    const data::Dataset& ds, const gower::DistanceMatrix& m,
    const QcadParams& params, std::span<const ScoreVariant> variants);

// Scores every object. Results are identical for any thread count.
std::vector<ObjectScore> score_all(const data::Dataset& ds,
                                   const gower::DistanceMatrix& m,
                                   const QcadParams& params);
std::vector<ObjectScore> score_all(const data::Dataset& ds,
                                   const QcadParams& params);

}  // namespace qcad

#endif  // QCAD_CORE_SCORING_HPP_
