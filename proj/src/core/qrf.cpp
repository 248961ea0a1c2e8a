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

#include "qrf.hpp"

#include <algorithm>
#include <numeric>

#include "error.hpp"

namespace qcad::qrf {
namespace {

// Stable sort of row ids by (value, id).
void sort_rows(std::span<std::uint32_t> rows, const Matrix& x, std::size_t f) {
  std::sort(rows.begin(), rows.end(), [&](std::uint32_t a, std::uint32_t b) {
    const double va = x(a, f), vb = x(b, f);
    return va < vb || (va == vb && a < b);
  });
}

struct Entry {
  double value;
  std::uint32_t row;
};

struct Pending {
  std::uint32_t node;
  std::uint32_t lo;
  std::uint32_t hi;
};

// Tolerance when comparing accumulated weights against a probability level.
constexpr double kCdfTolerance = 1e-12;

}  // namespace

SortedPredictors::SortedPredictors(Matrix x)
    : x_(std::make_shared<const Matrix>(std::move(x))) {
  const auto n = x_->rows;
  order_.resize(n * x_->cols);
  for (std::size_t f = 0; f < x_->cols; ++f) {
    std::span<std::uint32_t> rows(order_.data() + f * n, n);
    std::iota(rows.begin(), rows.end(), 0u);
    sort_rows(rows, *x_, f);
  }
}

std::size_t Tree::route(std::span<const double> u) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const Node& n = nodes_[i];
    i = u[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return i;
}

Tree fit_tree(const SortedPredictors& sorted, std::span<const double> y,
              const ForestParams& params, Rng& rng) {
  const Matrix& x = sorted.matrix();
  const std::size_t n = x.rows;
  const std::size_t d = x.cols;
  if (n == 0 || y.size() != n)
    throw ParameterError("fit_tree: need matching, non-empty x and y");
  if (d == 0) throw ParameterError("fit_tree: no predictor columns");

  Tree tree;
  tree.counts_.assign(n, 0);
  if (params.bootstrap) {
    for (std::size_t draw = 0; draw < n; ++draw) ++tree.counts_[rng.below(n)];
  } else {
    std::fill(tree.counts_.begin(), tree.counts_.end(), 1u);
  }
  const auto& counts = tree.counts_;

  // Per feature, the drawn rows in sorted order paired with their value.
  // Every node owns the same [lo, hi) slice in each of these arrays.
  std::size_t active = 0;
  for (auto c : counts) active += c > 0;
  std::vector<Entry> entries(d * active);
  for (std::size_t f = 0; f < d; ++f) {
    std::size_t k = 0;
    for (std::uint32_t r : sorted.order(f))
      if (counts[r] > 0) entries[f * active + k++] = {x(r, f), r};
  }
  auto slice = [&](std::size_t f) { return entries.data() + f * active; };

  // Bootstrap weight and weighted response per row.
  std::vector<double> cw(n), cy(n);
  for (std::size_t r = 0; r < n; ++r) {
    cw[r] = counts[r];
    cy[r] = counts[r] * y[r];
  }

  const std::size_t n_try =
      params.max_features == 0 ? d : std::min(params.max_features, d);
  std::vector<std::size_t> features(d);
  std::iota(features.begin(), features.end(), std::size_t{0});
  std::vector<std::uint8_t> goes_left(n);
  std::vector<Entry> scratch(active);

  tree.nodes_.emplace_back();
  tree.samples_.reserve(n);
  std::vector<Pending> stack{{0, 0, static_cast<std::uint32_t>(active)}};

  while (!stack.empty()) {
    const Pending job = stack.back();
    stack.pop_back();
    const Entry* rows = slice(0);

    double weight = 0.0, sum = 0.0;
    double y_min = y[rows[job.lo].row], y_max = y_min;
    for (std::uint32_t t = job.lo; t < job.hi; ++t) {
      const auto r = rows[t].row;
      weight += cw[r];
      sum += cy[r];
      y_min = std::min(y_min, y[r]);
      y_max = std::max(y_max, y[r]);
    }

    auto make_leaf = [&] {
      Node& leaf = tree.nodes_[job.node];
      leaf.begin = static_cast<std::uint32_t>(tree.samples_.size());
      for (std::uint32_t t = job.lo; t < job.hi; ++t)
        for (std::uint32_t c = counts[rows[t].row]; c > 0; --c)
          tree.samples_.push_back(rows[t].row);
      leaf.end = static_cast<std::uint32_t>(tree.samples_.size());
    };

    if (weight < static_cast<double>(params.min_samples_split) || y_min == y_max) {
      make_leaf();
      continue;
    }

    // With sl the left sum of responses centred on the node mean, the SSE
    // reduction of a split is sl^2 * W / (wl * (W - wl)).
    const double mean = sum / weight;
    double total_sse = 0.0;
    for (std::uint32_t t = job.lo; t < job.hi; ++t) {
      const auto r = rows[t].row;
      const double dev = y[r] - mean;
      total_sse += cw[r] * dev * dev;
    }

    if (n_try < d) {
      for (std::size_t i = 0; i < n_try; ++i)
        std::swap(features[i], features[i + rng.below(d - i)]);
    }

    double best_gain = 0.0;
    int best_feature = -1;
    std::uint32_t best_pos = 0;
    double best_threshold = 0.0;
    for (std::size_t fi = 0; fi < n_try; ++fi) {
      const std::size_t f = features[fi];
      const Entry* order = slice(f);
      double wl = 0.0, syl = 0.0;
      for (std::uint32_t t = job.lo; t + 1 < job.hi; ++t) {
        const auto r = order[t].row;
        wl += cw[r];
        syl += cy[r];
        const double here = order[t].value;
        const double next = order[t + 1].value;
        if (!(next > here)) continue;
        const double sl = syl - mean * wl;
        const double gain = sl * sl * weight / (wl * (weight - wl));
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_pos = t;
          double mid = here + (next - here) / 2.0;
          if (!(mid < next)) mid = here;
          best_threshold = mid;
        }
      }
    }

    if (best_feature < 0 || !(best_gain > 1e-12 * total_sse)) {
      make_leaf();
      continue;
    }

    const auto bf = static_cast<std::size_t>(best_feature);
    for (std::uint32_t t = job.lo; t < job.hi; ++t)
      goes_left[slice(bf)[t].row] = t <= best_pos;
    const std::uint32_t mid = best_pos + 1;
    for (std::size_t f = 0; f < d; ++f) {
      Entry* order = slice(f);
      std::uint32_t l = job.lo, rgt = 0;
      for (std::uint32_t t = job.lo; t < job.hi; ++t) {
        const Entry e = order[t];
        if (goes_left[e.row]) {
          order[l++] = e;
        } else {
          scratch[rgt++] = e;
        }
      }
      std::copy(scratch.begin(), scratch.begin() + rgt, order + mid);
    }

    const auto left = static_cast<std::uint32_t>(tree.nodes_.size());
    tree.nodes_.emplace_back();
    tree.nodes_.emplace_back();
    Node& node = tree.nodes_[job.node];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left;
    node.right = left + 1;
    stack.push_back({left + 1, mid, job.hi});
    stack.push_back({left, job.lo, mid});
  }
  return tree;
}

QuantileForest::QuantileForest(SortedPredictors x, std::vector<double> y,
                               ForestParams p)
    : x_(std::move(x)), y_(std::move(y)), params_(p) {}

QuantileForest QuantileForest::fit(const SortedPredictors& x,
                                   std::vector<double> y,
                                   const ForestParams& params,
                                   std::uint64_t seed) {
  if (params.n_trees < 1) throw ParameterError("forest: n_trees must be >= 1");
  if (params.min_samples_split < 1)
    throw ParameterError("forest: min_samples_split must be >= 1");
  if (y.size() != x.matrix().rows || y.empty())
    throw ParameterError("forest: need matching, non-empty x and y");

  QuantileForest forest(x, std::move(y), params);
  forest.y_order_.resize(forest.y_.size());
  std::iota(forest.y_order_.begin(), forest.y_order_.end(), 0u);
  const auto& yv = forest.y_;
  std::sort(forest.y_order_.begin(), forest.y_order_.end(),
            [&](std::uint32_t a, std::uint32_t b) {
              return yv[a] < yv[b] || (yv[a] == yv[b] && a < b);
            });
  forest.trees_.reserve(params.n_trees);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    Rng rng(sub_seed(seed, t));
    forest.trees_.push_back(fit_tree(forest.x_, forest.y_, params, rng));
  }
  return forest;
}

QuantileForest QuantileForest::fit(Matrix x, std::vector<double> y,
                                   const ForestParams& params,
                                   std::uint64_t seed) {
  return fit(SortedPredictors(std::move(x)), std::move(y), params, seed);
}

std::vector<double> QuantileForest::leaf_weights(
    std::span<const double> u) const {
  if (u.size() != x_.matrix().cols)
    throw ParameterError("forest: query has " + std::to_string(u.size()) +
                         " features, expected " +
                         std::to_string(x_.matrix().cols));
  std::vector<double> w(y_.size(), 0.0);
  for (const auto& tree : trees_) {
    const Node& leaf = tree.nodes()[tree.route(u)];
    const auto samples = tree.samples(leaf);
    const double share = 1.0 / static_cast<double>(samples.size());
    for (auto r : samples) w[r] += share;
  }
  const auto k = static_cast<double>(trees_.size());
  for (double& v : w) v /= k;
  return w;
}

double QuantileForest::cdf(std::span<const double> u, double v) const {
  const auto w = leaf_weights(u);
  double total = 0.0;
  for (std::size_t i = 0; i < y_.size(); ++i)
    if (y_[i] <= v) total += w[i];
  return total;
}

std::vector<double> QuantileForest::quantiles(
    std::span<const double> u, std::span<const double> alphas) const {
  return quantiles_from_weights(y_, y_order_, leaf_weights(u), alphas);
}

std::vector<double> QuantileForest::quantiles_from_weights(
    std::span<const double> y, std::span<const std::uint32_t> y_order,
    std::span<const double> weights, std::span<const double> alphas) {
  std::vector<double> out;
  out.reserve(alphas.size());
  std::size_t a = 0;
  double cum = 0.0;
  double last_supported = y[y_order.front()];
  bool seen_support = false;
  for (std::size_t i = 0; i < y_order.size() && a < alphas.size();) {
    // One step of the CDF: all responses equal to y[y_order[i]].
    const double v = y[y_order[i]];
    double step = 0.0;
    for (; i < y_order.size() && y[y_order[i]] == v; ++i) step += weights[y_order[i]];
    if (step <= 0.0) continue;
    cum += step;
    last_supported = v;
    if (!seen_support) {
      seen_support = true;
      while (a < alphas.size() && alphas[a] <= 0.0) {
        out.push_back(v);
        ++a;
      }
    }
    while (a < alphas.size() && cum >= alphas[a] - kCdfTolerance) {
      out.push_back(v);
      ++a;
    }
  }
  // Rounding left a level unreached: it belongs to the top of the support.
  while (out.size() < alphas.size()) out.push_back(last_supported);
  return out;
}

}  // namespace qcad::qrf
