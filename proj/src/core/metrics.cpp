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

#include "metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "error.hpp"

namespace qcad::eval {
namespace {

void check_sizes(std::span<const double> scores,
                 std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size())
    throw ParameterError("metrics: scores and labels differ in length");
  if (scores.empty()) throw ParameterError("metrics: empty input");
}

}  // namespace

std::vector<std::size_t> rank_by_score(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return order;
}

double roc_auc(std::span<const double> scores,
               std::span<const std::uint8_t> labels) {
  check_sizes(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Rank-sum with mid-ranks for ties. Ranks are kept doubled so every
  // intermediate value is an integer.
  double doubled_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const auto doubled_mid = static_cast<double>(i + 1 + j);  // 2 * mid-rank
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]]) {
        doubled_rank_sum += doubled_mid;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0)
    throw MetricError("roc_auc: labels contain a single class");
  const auto pos = static_cast<double>(positives);
  const auto neg = static_cast<double>(negatives);
  // U = rank_sum - P(P+1)/2 = (pairs won) + 0.5 (pairs tied)
  const double u = (doubled_rank_sum - pos * (pos + 1.0)) / 2.0;
  return u / (pos * neg);
}

double pr_auc(std::span<const double> scores,
              std::span<const std::uint8_t> labels) {
  check_sizes(scores, labels);
  const auto order = rank_by_score(scores);
  double total = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (!labels[order[r]]) continue;
    ++hits;
    total += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  if (hits == 0) throw MetricError("pr_auc: no positive labels");
  return total / static_cast<double>(hits);
}

double precision_at_n(std::span<const double> scores,
                      std::span<const std::uint8_t> labels, std::size_t n) {
  check_sizes(scores, labels);
  if (n < 1 || n > scores.size())
    throw ParameterError("precision_at_n: n=" + std::to_string(n) +
                         " must lie in [1, " + std::to_string(scores.size()) + "]");
  const auto order = rank_by_score(scores);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < n; ++r) hits += labels[order[r]] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace qcad::eval
