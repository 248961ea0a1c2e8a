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

#ifndef QCAD_CORE_EXPERIMENT_HPP_
#define QCAD_CORE_EXPERIMENT_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "gower.hpp"
#include "scoring.hpp"

namespace qcad::eval {

enum Metric : std::size_t { kRocAuc = 0, kPrAuc = 1, kPrecisionAtN = 2 };
inline constexpr std::size_t kMetricCount = 3;
const char* metric_name(Metric m);

struct TrialResult {
  std::array<std::vector<double>, kMetricCount> values;

  std::size_t trials() const { return values[0].size(); }
  double mean(Metric m) const;
  // Sample (n - 1) standard deviation; 0 for a single trial.
  double stddev(Metric m) const;
};

struct TrialOptions {
  std::size_t trials = 10;
  double inject_rate = 0.025;
  std::uint64_t seed = 0;
};

// Number of injected anomalies for a dataset of n rows: round(rate * n),
// at least 1.
std::size_t injected_count(std::size_t n, double rate);

// Trial t injects anomalies into the normalized `base` with seed
// sub_seed(seed, t), scores it with the forest seed set to the same value and
// records ROC AUC, PR AUC and precision at n = #injected. The distance matrix
// only depends on contextual values, which injection leaves untouched.
TrialResult run_trials(const data::Dataset& base, const gower::DistanceMatrix& m,
                       const QcadParams& params, const TrialOptions& options);
TrialResult run_trials(const data::Dataset& base, const QcadParams& params,
                       const TrialOptions& options);

// One TrialResult per variant; every variant sees the same injections and
// the same fitted forests.
std::vector<TrialResult> run_trials_variants(
    const data::Dataset& base, const gower::DistanceMatrix& m,
    const QcadParams& params, const TrialOptions& options,
    std::span<const ScoreVariant> variants);

enum class SweepKind { kK, kEta, kScaling };

// One configuration of a sweep. For kEta an empty value disables clipping;
// for kScaling the value is 1 (on) or 0 (off).
struct SweepPoint {
  std::optional<double> value;
  TrialResult result;

  std::string label(SweepKind kind) const;
};

std::vector<SweepPoint> sweep(const data::Dataset& base, const QcadParams& params,
                              const TrialOptions& options, SweepKind kind,
                              const std::vector<std::optional<double>>& values);

std::vector<SweepPoint> sweep_k(const data::Dataset& base, const QcadParams& params,
                                const TrialOptions& options,
                                const std::vector<std::size_t>& k_values);
std::vector<SweepPoint> sweep_eta(const data::Dataset& base,
                                  const QcadParams& params,
                                  const TrialOptions& options,
                                  const std::vector<std::optional<double>>& etas);

// CSV with columns trial,roc_auc,pr_auc,p_at_n; one row per trial followed by
// `mean` and `std` rows.
std::string trials_csv(const TrialResult& r);
// CSV with one row per configuration:
// sweep,value,roc_auc_mean,roc_auc_std,pr_auc_mean,pr_auc_std,p_at_n_mean,p_at_n_std
std::string sweep_csv(SweepKind kind, const std::vector<SweepPoint>& points);
// Aligned plain-text table of mean +- std per configuration.
std::string sweep_table(SweepKind kind, const std::vector<SweepPoint>& points);

const char* sweep_name(SweepKind kind);

}  // namespace qcad::eval

#endif  // QCAD_CORE_EXPERIMENT_HPP_
