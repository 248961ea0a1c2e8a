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

#ifndef QCAD_CORE_QRF_HPP_
#define QCAD_CORE_QRF_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "random.hpp"

namespace qcad::qrf {

struct ForestParams {
  std::size_t n_trees = 10;
  // Features drawn (without replacement) at every split; 0 means all.
  std::size_t max_features = 0;
  // Nodes holding fewer samples than this (bootstrap copies included) become
  // leaves.
  std::size_t min_samples_split = 10;
  // Draw n rows with replacement per tree. When false every tree sees each
  // training row exactly once.
  bool bootstrap = true;
};

// Dense row-major predictor matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c) {}

  double operator()(std::size_t r, std::size_t c) const {
    return values[r * cols + c];
  }
  double& operator()(std::size_t r, std::size_t c) {
    return values[r * cols + c];
  }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols, cols};
  }
};

// Predictor matrix with every column's row order precomputed, sorted by
// (value, row). Shared by all trees (and forests) fit on the same rows.
class SortedPredictors {
 public:
  explicit SortedPredictors(Matrix x);

  const Matrix& matrix() const { return *x_; }
  std::span<const std::uint32_t> order(std::size_t feature) const {
    return {order_.data() + feature * x_->rows, x_->rows};
  }

 private:
  std::shared_ptr<const Matrix> x_;
  std::vector<std::uint32_t> order_;
};

struct Node {
  // Internal nodes: rows with u[feature] <= threshold go left.
  int feature = -1;
  double threshold = 0.0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  // Leaves: range into Tree::leaf_samples().
  std::uint32_t begin = 0;
  std::uint32_t end = 0;

  bool is_leaf() const { return feature < 0; }
};

// Regression tree whose leaves keep every bootstrap sample that reached them
// (duplicates included).
class Tree {
 public:
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::uint32_t>& leaf_samples() const { return samples_; }
  std::span<const std::uint32_t> samples(const Node& leaf) const {
    return {samples_.data() + leaf.begin, leaf.end - leaf.begin};
  }
  // Per training row, how often the bootstrap drew it.
  const std::vector<std::uint32_t>& bootstrap_counts() const { return counts_; }

  // Index of the leaf node that u falls into.
  std::size_t route(std::span<const double> u) const;

 private:
  friend Tree fit_tree(const SortedPredictors&, std::span<const double>,
                       const ForestParams&, Rng&);
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> samples_;
  std::vector<std::uint32_t> counts_;
};

// CART regression tree: bootstrap, then recursive best split by reduction of
// the sum of squared errors over a random feature subset per node. Thresholds
// sit at the midpoint between the two sorted values straddling the split.
Tree fit_tree(const SortedPredictors& x, std::span<const double> y,
              const ForestParams& params, Rng& rng);

class QuantileForest {
 public:
  // Tree t is grown from Rng(sub_seed(seed, t)).
  static QuantileForest fit(const SortedPredictors& x, std::vector<double> y,
                            const ForestParams& params, std::uint64_t seed);
  static QuantileForest fit(Matrix x, std::vector<double> y,
                            const ForestParams& params, std::uint64_t seed);

  const std::vector<Tree>& trees() const { return trees_; }
  const Matrix& train_x() const { return x_.matrix(); }
  const std::vector<double>& train_y() const { return y_; }
  const ForestParams& params() const { return params_; }

  // w_i(u) = (1/K) sum_t [i shares u's leaf in tree t] * copies / occupancy.
  std::vector<double> leaf_weights(std::span<const double> u) const;

  // F(v | u) = sum_i w_i(u) [y_i <= v].
  double cdf(std::span<const double> u, double v) const;

  // For alpha > 0 the smallest training response v with F(v | u) >= alpha;
  // for alpha = 0 the smallest response with positive weight. `alphas` must
  // be ascending.
  std::vector<double> quantiles(std::span<const double> u,
                                std::span<const double> alphas) const;
  static std::vector<double> quantiles_from_weights(
      std::span<const double> y, std::span<const std::uint32_t> y_order,
      std::span<const double> weights, std::span<const double> alphas);

 private:
  QuantileForest(SortedPredictors x, std::vector<double> y, ForestParams p);

  SortedPredictors x_;
  std::vector<double> y_;
  std::vector<std::uint32_t> y_order_;
  ForestParams params_;
  std::vector<Tree> trees_;
};

}  // namespace qcad::qrf

#endif  // QCAD_CORE_QRF_HPP_
