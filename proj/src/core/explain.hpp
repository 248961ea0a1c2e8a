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

#ifndef QCAD_CORE_EXPLAIN_HPP_
#define QCAD_CORE_EXPLAIN_HPP_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "dataset.hpp"
#include "scoring.hpp"

namespace qcad::explain {

struct FeatureScore {
  std::size_t feature = 0;  // behavioral index
  std::string name;
  double score = 0.0;
};

// Distribution of one contextual feature over a reference group.
struct GroupHistogram {
  std::string feature;
  bool categorical = false;
  std::vector<double> edges;             // numeric: bins + 1 edges
  std::vector<std::string> categories;   // categorical: one per code
  std::vector<std::size_t> counts;
  double object_value = 0.0;             // raw value or code
};

struct Explanation {
  std::size_t index = 0;
  double final_score = 0.0;
  std::vector<FeatureScore> top_features;
  std::vector<std::size_t> reference_group;
  std::vector<GroupHistogram> group_profile;

  std::string to_json() const;
};

inline constexpr std::size_t kMaxHistogramBins = 10;

// Numeric features: up to kMaxHistogramBins equal-width bins spanning the
// members' range (a single bin when it is zero). Categorical features: a
// count for every code of the column.
GroupHistogram group_histogram(const data::Dataset& ds,
                               const gower::ReferenceGroup& group,
                               std::size_t contextual_index);

// Top min(h, Q) behavioral features by partial score (descending, ties by
// feature index) plus per-contextual-feature group histograms.
Explanation explain(const ObjectScore& entry, const data::Dataset& ds,
                    std::size_t h);

inline constexpr double kBeanplotWidth = 400.0;
inline constexpr double kBeanplotHeight = 600.0;
inline constexpr double kMinIntervalWidth = 1e-9;

// Half-width in pixels of the density silhouette on each interval
// [tau_i, tau_i+1]: proportional to 0.01 / max(w_i, 1e-9), scaled so the
// densest interval of positive width spans `full_half_width`; zero-width
// intervals are capped at `full_half_width`.
std::vector<double> silhouette_half_widths(const PercentileProfile& p,
                                           double full_half_width);

// SVG 1.1 anomaly beanplot: percentile ticks, quartile box with median,
// inverse-width density silhouette and the observed value.
std::string render_beanplot(const PercentileProfile& p, double actual,
                            std::string_view feature_name);

// SVG bar chart of a group histogram with the object's value marked.
std::string render_histogram(const GroupHistogram& h);

}  // namespace qcad::explain

#endif  // QCAD_CORE_EXPLAIN_HPP_
