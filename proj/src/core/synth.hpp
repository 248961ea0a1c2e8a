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

#ifndef QCAD_CORE_SYNTH_HPP_
#define QCAD_CORE_SYNTH_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dataset.hpp"
#include "random.hpp"

namespace qcad::synth {

// Dependency of each behavioral feature b^q on the contextual features c^p:
//   S1: sum_p a_qp c^p
//   S2: sum_p a_qp (c^p)^3
//   S3: sum_p a_qp sin(c^p)
//   S4: sum_p a_qp log(1 + |c^p|)
//   S5: sum_p a_qp c^p + b_qp (c^p)^3 + g_qp sin(c^p) + d_qp log(1 + |c^p|)
// plus independent U(0, 0.05) noise per sample.
enum class Scheme { kS1 = 1, kS2, kS3, kS4, kS5 };

std::optional<Scheme> parse_scheme(std::string_view name);
std::string scheme_name(Scheme s);

struct SchemeSpec {
  Scheme scheme = Scheme::kS1;
  std::size_t n = 2000;
  std::size_t p = 5;      // contextual features
  std::size_t p_cat = 2;  // of which categorical (the last p_cat)
  std::size_t q = 5;      // behavioral features
  std::uint64_t seed = 0;

  void validate() const;
};

// Raw contextual values. Categorical columns hold non-negative integers.
struct ContextualBlock {
  std::vector<std::vector<double>> columns;
  std::vector<bool> categorical;
};

// Each feature independently from a five-component Gaussian mixture with
// uniform component weights. Numeric centroids ~ U(0, 1); categorical
// centroids uniform on {0, ..., 10}. The component standard deviation is a
// quarter of the mean pairwise distance between that feature's centroids.
// Categorical draws are rounded and clamped at zero.
ContextualBlock gen_contextual(const SchemeSpec& spec, Rng& rng);

inline constexpr std::size_t kMixtureComponents = 5;

// A quarter of the mean pairwise absolute distance between centroids.
double mixture_sigma(std::span<const double> centroids);

// n draws from the equal-weight mixture of N(centroid, mixture_sigma).
// Categorical draws are rounded and clamped at zero.
std::vector<double> sample_mixture(std::span<const double> centroids,
                                   bool categorical, std::size_t n, Rng& rng);

// Per behavioral feature q and summed contextual feature p, the coefficients
// (a, b, g, d) of the scheme formula. Schemes S1-S4 only use `a`.
struct Coefficients {
  std::vector<std::vector<std::array<double, 4>>> terms;  // [q][p]
};

// Every coefficient ~ U(0, 1), then zeroed with probability 1/3.
Coefficients draw_coefficients(std::size_t q, std::size_t terms, Rng& rng);

// Evaluates the scheme with given coefficients and per-feature noise
// vectors (noise[q][i]). Sums run over the first coefficients.terms[q].size()
// contextual columns.
std::vector<std::vector<double>> evaluate_scheme(
    Scheme scheme, const std::vector<std::vector<double>>& contextual,
    const Coefficients& coefficients,
    const std::vector<std::vector<double>>& noise);

// Draws coefficients and noise and evaluates the scheme. The sums run over
// the first min(P, Q) contextual features.
std::vector<std::vector<double>> gen_behavioral(
    Scheme scheme, const std::vector<std::vector<double>>& contextual,
    std::size_t q, Rng& rng);

// Features c1..cP (the last p_cat categorical) and b1..bQ, behavioral
// columns min-max normalized.
data::Dataset make_synthetic(const SchemeSpec& spec);

struct InjectionRecord {
  std::vector<std::size_t> indices;          // ascending
  std::vector<std::vector<double>> deltas;   // [index][behavioral feature]

  std::string to_json() const;
};

// Picks m distinct rows uniformly and adds to each of their behavioral
// values an independent delta with |delta| ~ U(0.1, 0.5) and a fair random
// sign. Values are not truncated. Labels mark exactly the perturbed rows.
std::pair<data::Dataset, InjectionRecord> inject_anomalies(
    const data::Dataset& ds, std::size_t m, std::uint64_t seed);

}  // namespace qcad::synth

#endif  // QCAD_CORE_SYNTH_HPP_
