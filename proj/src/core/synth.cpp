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

#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "error.hpp"

namespace qcad::synth {

std::optional<Scheme> parse_scheme(std::string_view name) {
  if (name.size() != 2 || (name[0] != 's' && name[0] != 'S')) return std::nullopt;
  if (name[1] < '1' || name[1] > '5') return std::nullopt;
  return static_cast<Scheme>(name[1] - '0');
}

std::string scheme_name(Scheme s) {
  return "s" + std::to_string(static_cast<int>(s));
}

void SchemeSpec::validate() const {
  if (n < 1) throw ParameterError("synth: n must be >= 1");
  if (p < 1) throw ParameterError("synth: p must be >= 1");
  if (q < 1) throw ParameterError("synth: q must be >= 1");
  if (p_cat > p) throw ParameterError("synth: p_cat must not exceed p");
}

double mixture_sigma(std::span<const double> centroids) {
  double spread = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < centroids.size(); ++a)
    for (std::size_t b = a + 1; b < centroids.size(); ++b, ++pairs)
      spread += std::abs(centroids[a] - centroids[b]);
  return pairs ? 0.25 * spread / static_cast<double>(pairs) : 0.0;
}

std::vector<double> sample_mixture(std::span<const double> centroids,
                                   bool categorical, std::size_t n, Rng& rng) {
  if (centroids.empty()) throw ParameterError("synth: no mixture centroids");
  const double sigma = mixture_sigma(centroids);
  std::vector<double> col(n);
  for (double& v : col) {
    const double centre = centroids[rng.below(centroids.size())];
    v = rng.normal(centre, sigma);
    if (categorical) v = std::max(0.0, std::round(v));
  }
  return col;
}

ContextualBlock gen_contextual(const SchemeSpec& spec, Rng& rng) {
  ContextualBlock block;
  block.columns.resize(spec.p);
  block.categorical.resize(spec.p);
  const std::size_t first_cat = spec.p - spec.p_cat;
  for (std::size_t f = 0; f < spec.p; ++f) {
    const bool cat = f >= first_cat;
    block.categorical[f] = cat;
    std::array<double, kMixtureComponents> centroids{};
    for (double& c : centroids)
      c = cat ? static_cast<double>(rng.below(11)) : rng.uniform();
    block.columns[f] = sample_mixture(centroids, cat, spec.n, rng);
  }
  return block;
}

Coefficients draw_coefficients(std::size_t q, std::size_t terms, Rng& rng) {
  Coefficients c;
  c.terms.resize(q);
  for (auto& per_q : c.terms) {
    per_q.resize(terms);
    for (auto& t : per_q)
      for (double& v : t) {
        v = rng.uniform();
        if (rng.uniform() < 1.0 / 3.0) v = 0.0;
      }
  }
  return c;
}

std::vector<std::vector<double>> evaluate_scheme(
    Scheme scheme, const std::vector<std::vector<double>>& contextual,
    const Coefficients& coefficients,
    const std::vector<std::vector<double>>& noise) {
  const std::size_t q_count = coefficients.terms.size();
  if (noise.size() != q_count)
    throw ParameterError("synth: one noise vector per behavioral feature");
  const std::size_t n = contextual.empty() ? 0 : contextual.front().size();
  std::vector<std::vector<double>> out(q_count, std::vector<double>(n, 0.0));
  for (std::size_t q = 0; q < q_count; ++q) {
    const auto& terms = coefficients.terms[q];
    if (terms.size() > contextual.size())
      throw ParameterError("synth: more terms than contextual features");
    for (std::size_t i = 0; i < n; ++i) {
      double b = 0.0;
      for (std::size_t p = 0; p < terms.size(); ++p) {
        const double c = contextual[p][i];
        const auto& [a, beta, gamma, delta] = terms[p];
        switch (scheme) {
          case Scheme::kS1: b += a * c; break;
          case Scheme::kS2: b += a * c * c * c; break;
          case Scheme::kS3: b += a * std::sin(c); break;
          case Scheme::kS4: b += a * std::log(1.0 + std::abs(c)); break;
          case Scheme::kS5:
            b += a * c + beta * c * c * c + gamma * std::sin(c) +
                 delta * std::log(1.0 + std::abs(c));
            break;
        }
      }
      out[q][i] = b + noise[q].at(i);
    }
  }
  return out;
}

std::vector<std::vector<double>> gen_behavioral(
    Scheme scheme, const std::vector<std::vector<double>>& contextual,
    std::size_t q, Rng& rng) {
  // Sums stop at min(P, Q); extra contextual columns carry no signal.
  const std::size_t terms = std::min(contextual.size(), q);
  const auto coefficients = draw_coefficients(q, terms, rng);
  const std::size_t n = contextual.empty() ? 0 : contextual.front().size();
  std::vector<std::vector<double>> noise(q, std::vector<double>(n));
  for (auto& column : noise)
    for (double& e : column) e = rng.uniform(0.0, 0.05);
  return evaluate_scheme(scheme, contextual, coefficients, noise);
}

data::Dataset make_synthetic(const SchemeSpec& spec) {
  spec.validate();
  Rng ctx_rng(sub_seed(spec.seed, 0));
  Rng bhv_rng(sub_seed(spec.seed, 1));
  const auto block = gen_contextual(spec, ctx_rng);
  const auto behavioral = gen_behavioral(spec.scheme, block.columns, spec.q, bhv_rng);

  std::vector<data::FeatureSpec> features;
  std::vector<data::Column> columns;
  for (std::size_t p = 0; p < spec.p; ++p) {
    const bool cat = block.categorical[p];
    features.push_back({"c" + std::to_string(p + 1), data::Role::kContextual,
                        cat ? data::Kind::kCategorical : data::Kind::kNumeric});
    data::Column col;
    if (cat) {
      // Same encoding the CSV reader applies, so a saved dataset reloads
      // unchanged.
      std::vector<std::string> raw;
      raw.reserve(spec.n);
      for (double v : block.columns[p])
        raw.push_back(std::to_string(static_cast<long>(v)));
      auto enc = data::label_encode(raw);
      col.values.assign(enc.codes.begin(), enc.codes.end());
      col.categories = std::move(enc.labels);
    } else {
      col.values = block.columns[p];
    }
    columns.push_back(std::move(col));
  }
  for (std::size_t q = 0; q < spec.q; ++q) {
    features.push_back({"b" + std::to_string(q + 1), data::Role::kBehavioral,
                        data::Kind::kNumeric});
    columns.push_back({behavioral[q], {}});
  }
  return data::minmax_normalize(
      data::Dataset(data::FeatureSchema(std::move(features)), std::move(columns)));
}

std::string InjectionRecord::to_json() const {
  nlohmann::json j;
  j["indices"] = indices;
  j["deltas"] = deltas;
  return j.dump();
}

std::pair<data::Dataset, InjectionRecord> inject_anomalies(
    const data::Dataset& ds, std::size_t m, std::uint64_t seed) {
  const std::size_t n = ds.size();
  if (m == 0 || m >= n)
    throw ParameterError("inject: m=" + std::to_string(m) +
                         " must satisfy 0 < m < N=" + std::to_string(n));
  if (!ds.normalized())
    throw ParameterError("inject: behavioral features must be normalized first");

  Rng rng(seed);
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < m; ++i) std::swap(pool[i], pool[i + rng.below(n - i)]);
  InjectionRecord record;
  record.indices.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(m));
  std::sort(record.indices.begin(), record.indices.end());

  const auto& behavioral = ds.schema().behavioral();
  std::vector<data::Column> columns;
  for (std::size_t f : behavioral) columns.push_back(ds.column(f));
  record.deltas.resize(m);
  std::vector<std::uint8_t> labels(n, 0);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t row = record.indices[k];
    labels[row] = 1;
    for (std::size_t q = 0; q < behavioral.size(); ++q) {
      const double sign = rng.coin() ? 1.0 : -1.0;
      const double delta = sign * rng.uniform(0.1, 0.5);
      record.deltas[k].push_back(delta);
      columns[q].values[row] += delta;
    }
  }
  data::Dataset out = ds.with_labels(std::move(labels));
  for (std::size_t q = 0; q < behavioral.size(); ++q)
    out = out.with_column(behavioral[q], std::move(columns[q]));
  return {std::move(out), std::move(record)};
}

}  // namespace qcad::synth
