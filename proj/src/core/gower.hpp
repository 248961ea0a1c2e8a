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

#ifndef QCAD_CORE_GOWER_HPP_
#define QCAD_CORE_GOWER_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"

namespace qcad::gower {

// Per contextual feature: the column's range over the whole dataset, or a
// categorical marker.
struct FeatureRange {
  double min = 0.0;
  double max = 0.0;
  bool categorical = false;
};

std::vector<FeatureRange> contextual_ranges(const data::Dataset& ds);

// Gower distance on the contextual features:
//   d = 1 - (sum_p ps_p) / P
// where ps_p = 1 - |c_i - c_j| / (max - min) for numeric features (1 when the
// range is zero) and ps_p = [c_i == c_j] for categorical ones.
double gower_distance(const data::Dataset& ds, std::size_t i, std::size_t j,
                      std::span<const FeatureRange> ranges);

// Dense symmetric N x N matrix, row-major.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(std::size_t n, std::vector<double> values);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const {
    return values_[i * n_ + j];
  }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * n_, n_};
  }
  const std::vector<double>& values() const { return values_; }

  // Binary cache: little-endian u64 N followed by N*N little-endian f64.
  void save(const std::string& path) const;
  static DistanceMatrix load(const std::string& path);

  bool operator==(const DistanceMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

// Rows are filled in parallel; the result does not depend on `threads`.
DistanceMatrix distance_matrix(const data::Dataset& ds, unsigned threads = 1);

struct ReferenceGroup {
  std::size_t center = 0;
  std::vector<std::size_t> members;  // nearest first
};

// The k nearest objects to `center`, excluding the center itself. Equal
// distances are ordered by ascending index. Requires 1 <= k <= N - 1.
ReferenceGroup reference_group(const DistanceMatrix& m, std::size_t center,
                               std::size_t k);

}  // namespace qcad::gower

#endif  // QCAD_CORE_GOWER_HPP_
