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

#ifndef QCAD_CORE_METRICS_HPP_
#define QCAD_CORE_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace qcad::eval {

// Object indices by descending score, equal scores by ascending index.
std::vector<std::size_t> rank_by_score(std::span<const double> scores);

// Probability that a random positive outscores a random negative, ties
// counted as one half (Mann-Whitney). Throws MetricError unless both classes
// are present.
double roc_auc(std::span<const double> scores,
               std::span<const std::uint8_t> labels);

// Average precision over the ranking of rank_by_score: the mean, over
// positives, of the precision at each positive's rank.
double pr_auc(std::span<const double> scores,
              std::span<const std::uint8_t> labels);

// Fraction of positives among the top n of rank_by_score, 1 <= n <= N.
double precision_at_n(std::span<const double> scores,
                      std::span<const std::uint8_t> labels, std::size_t n);

}  // namespace qcad::eval

#endif  // QCAD_CORE_METRICS_HPP_
