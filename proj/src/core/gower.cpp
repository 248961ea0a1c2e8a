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

#include "gower.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "error.hpp"
#include "parallel.hpp"

namespace qcad::gower {

static_assert(std::endian::native == std::endian::little,
              "the distance cache format assumes a little-endian host");

std::vector<FeatureRange> contextual_ranges(const data::Dataset& ds) {
  std::vector<FeatureRange> ranges;
  for (std::size_t f : ds.schema().contextual()) {
    FeatureRange r;
    if (ds.schema().feature(f).kind == data::Kind::kCategorical) {
      r.categorical = true;
    } else {
      const auto& v = ds.column(f).values;
      const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      r.min = *lo;
      r.max = *hi;
    }
    ranges.push_back(r);
  }
  return ranges;
}

double gower_distance(const data::Dataset& ds, std::size_t i, std::size_t j,
                      std::span<const FeatureRange> ranges) {
  const auto& ctx = ds.schema().contextual();
  double similarity = 0.0;
  for (std::size_t p = 0; p < ctx.size(); ++p) {
    const auto& col = ds.column(ctx[p]).values;
    const auto& r = ranges[p];
    if (r.categorical) {
      similarity += col[i] == col[j] ? 1.0 : 0.0;
    } else if (r.max > r.min) {
      similarity += 1.0 - std::abs(col[i] - col[j]) / (r.max - r.min);
    } else {
      similarity += 1.0;
    }
  }
  return 1.0 - similarity / static_cast<double>(ctx.size());
}

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> values)
    : n_(n), values_(std::move(values)) {
  if (values_.size() != n_ * n_)
    throw DataError("distance matrix: expected " + std::to_string(n_ * n_) +
                    " values, got " + std::to_string(values_.size()));
}

void DistanceMatrix::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  const auto n = static_cast<std::uint64_t>(n_);
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(values_.data()),
            static_cast<std::streamsize>(values_.size() * sizeof(double)));
  if (!out) throw IoError("failed writing '" + path + "'");
}

DistanceMatrix DistanceMatrix::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!in) throw DataError("distance cache '" + path + "': truncated header");
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::uint64_t>(in.tellg());
  if (n == 0 || (bytes - sizeof(n)) / sizeof(double) / n != n ||
      bytes != sizeof(n) + n * n * sizeof(double))
    throw DataError("distance cache '" + path + "': size does not match N=" +
                    std::to_string(n));
  in.seekg(sizeof(n));
  std::vector<double> values(n * n);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) throw IoError("failed reading '" + path + "'");
  return DistanceMatrix(n, std::move(values));
}

DistanceMatrix distance_matrix(const data::Dataset& ds, unsigned threads) {
  const std::size_t n = ds.size();
  const auto ranges = contextual_ranges(ds);
  std::vector<double> values(n * n, 0.0);
  // Row i owns the upper-triangle entries (i, j > i) and their mirror.
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = gower_distance(ds, i, j, ranges);
      values[i * n + j] = d;
      values[j * n + i] = d;
    }
  });
  return DistanceMatrix(n, std::move(values));
}

ReferenceGroup reference_group(const DistanceMatrix& m, std::size_t center,
                               std::size_t k) {
  const std::size_t n = m.size();
  if (center >= n)
    throw ParameterError("reference group: object index " +
                         std::to_string(center) + " out of range");
  if (k < 1 || k > n - 1)
    throw ParameterError("reference group: k=" + std::to_string(k) +
                         " must lie in [1, " + std::to_string(n - 1) + "]");
  const auto row = m.row(center);
  std::vector<std::size_t> candidates;
  candidates.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j)
    if (j != center) candidates.push_back(j);
  auto closer = [&](std::size_t a, std::size_t b) {
    return row[a] < row[b] || (row[a] == row[b] && a < b);
  };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                    candidates.end(), closer);
  candidates.resize(k);
  return {center, std::move(candidates)};
}

}  // namespace qcad::gower
