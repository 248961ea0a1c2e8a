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

#include "experiment.hpp"

#include <cmath>
#include <sstream>

#include "error.hpp"
#include "metrics.hpp"
#include "random.hpp"
#include "synth.hpp"
#include "text.hpp"

namespace qcad::eval {

const char* metric_name(Metric m) {
  switch (m) {
    case kRocAuc: return "roc_auc";
    case kPrAuc: return "pr_auc";
    case kPrecisionAtN: return "p_at_n";
  }
  return "?";
}

const char* sweep_name(SweepKind kind) {
  switch (kind) {
    case SweepKind::kK: return "k";
    case SweepKind::kEta: return "eta";
    case SweepKind::kScaling: return "scaling";
  }
  return "?";
}

double TrialResult::mean(Metric m) const {
  const auto& v = values[m];
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double TrialResult::stddev(Metric m) const {
  const auto& v = values[m];
  if (v.size() < 2) return 0.0;
  const double mu = mean(m);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::size_t injected_count(std::size_t n, double rate) {
  if (!(rate > 0.0 && rate < 1.0))
    throw ParameterError("inject rate must lie in (0, 1)");
  const auto m = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
  return m < 1 ? 1 : m;
}

std::vector<TrialResult> run_trials_variants(
    const data::Dataset& base, const gower::DistanceMatrix& m,
    const QcadParams& params, const TrialOptions& options,
    std::span<const ScoreVariant> variants) {
  if (options.trials < 1) throw ParameterError("trials must be >= 1");
  if (variants.empty()) throw ParameterError("no scoring variants given");
  params.validate(base.size());
  const std::size_t injected = injected_count(base.size(), options.inject_rate);
  std::vector<TrialResult> results(variants.size());
  for (std::size_t t = 0; t < options.trials; ++t) {
    const std::uint64_t trial_seed = sub_seed(options.seed, t);
    const auto [ds, record] = synth::inject_anomalies(base, injected, trial_seed);
    QcadParams p = params;
    p.seed = trial_seed;
    const auto scores = score_all_variants(ds, m, p, variants);
    for (std::size_t v = 0; v < variants.size(); ++v) {
      std::vector<double> final_scores(scores[v].size());
      for (std::size_t i = 0; i < final_scores.size(); ++i)
        final_scores[i] = scores[v][i].final_score;
      auto& r = results[v];
      r.values[kRocAuc].push_back(roc_auc(final_scores, ds.labels()));
      r.values[kPrAuc].push_back(pr_auc(final_scores, ds.labels()));
      r.values[kPrecisionAtN].push_back(
          precision_at_n(final_scores, ds.labels(), injected));
    }
  }
  return results;
}

TrialResult run_trials(const data::Dataset& base, const gower::DistanceMatrix& m,
                       const QcadParams& params, const TrialOptions& options) {
  const ScoreVariant variant{params.eta, params.scaling};
  return std::move(run_trials_variants(base, m, params, options, {&variant, 1}).front());
}

TrialResult run_trials(const data::Dataset& base, const QcadParams& params,
                       const TrialOptions& options) {
  params.validate(base.size());
  return run_trials(base, gower::distance_matrix(base, params.threads), params,
                    options);
}

std::string SweepPoint::label(SweepKind kind) const {
  if (!value) return "none";
  if (kind == SweepKind::kScaling) return *value != 0.0 ? "on" : "off";
  return text::format_double(*value);
}

std::vector<SweepPoint> sweep(const data::Dataset& base, const QcadParams& params,
                              const TrialOptions& options, SweepKind kind,
                              const std::vector<std::optional<double>>& values) {
  if (values.empty()) throw ParameterError("sweep: no values given");
  std::vector<QcadParams> configs;
  for (const auto& v : values) {
    QcadParams p = params;
    switch (kind) {
      case SweepKind::kK:
        if (!v || *v < 1 || *v != std::floor(*v))
          throw ParameterError("sweep: k values must be positive integers");
        p.k = static_cast<std::size_t>(*v);
        break;
      case SweepKind::kEta:
        p.eta = v;
        break;
      case SweepKind::kScaling:
        if (!v) throw ParameterError("sweep: scaling values must be 0 or 1");
        p.scaling = *v != 0.0;
        break;
    }
    p.validate(base.size());
    configs.push_back(p);
  }
  const auto m = gower::distance_matrix(base, params.threads);
  std::vector<SweepPoint> points;
  if (kind == SweepKind::kK) {
    for (std::size_t i = 0; i < configs.size(); ++i)
      points.push_back({values[i], run_trials(base, m, configs[i], options)});
    return points;
  }
  // eta and scaling only act after the forests are fit.
  std::vector<ScoreVariant> variants;
  for (const auto& c : configs) variants.push_back({c.eta, c.scaling});
  auto results = run_trials_variants(base, m, params, options, variants);
  for (std::size_t i = 0; i < configs.size(); ++i)
    points.push_back({values[i], std::move(results[i])});
  return points;
}

std::vector<SweepPoint> sweep_k(const data::Dataset& base, const QcadParams& params,
                                const TrialOptions& options,
                                const std::vector<std::size_t>& k_values) {
  std::vector<std::optional<double>> values;
  for (auto k : k_values) values.emplace_back(static_cast<double>(k));
  return sweep(base, params, options, SweepKind::kK, values);
}

std::vector<SweepPoint> sweep_eta(const data::Dataset& base,
                                  const QcadParams& params,
                                  const TrialOptions& options,
                                  const std::vector<std::optional<double>>& etas) {
  return sweep(base, params, options, SweepKind::kEta, etas);
}

std::string trials_csv(const TrialResult& r) {
  std::string out = "trial,roc_auc,pr_auc,p_at_n\n";
  for (std::size_t t = 0; t < r.trials(); ++t) {
    out += std::to_string(t + 1);
    for (std::size_t m = 0; m < kMetricCount; ++m)
      out += "," + text::format_double(r.values[m][t]);
    out += '\n';
  }
  out += "mean";
  for (std::size_t m = 0; m < kMetricCount; ++m)
    out += "," + text::format_double(r.mean(static_cast<Metric>(m)));
  out += "\nstd";
  for (std::size_t m = 0; m < kMetricCount; ++m)
    out += "," + text::format_double(r.stddev(static_cast<Metric>(m)));
  out += '\n';
  return out;
}

std::string sweep_csv(SweepKind kind, const std::vector<SweepPoint>& points) {
  std::string out =
      "sweep,value,roc_auc_mean,roc_auc_std,pr_auc_mean,pr_auc_std,p_at_n_mean,"
      "p_at_n_std\n";
  for (const auto& pt : points) {
    out += sweep_name(kind);
    out += "," + pt.label(kind);
    for (std::size_t m = 0; m < kMetricCount; ++m) {
      const auto metric = static_cast<Metric>(m);
      out += "," + text::format_double(pt.result.mean(metric));
      out += "," + text::format_double(pt.result.stddev(metric));
    }
    out += '\n';
  }
  return out;
}

std::string sweep_table(SweepKind kind, const std::vector<SweepPoint>& points) {
  std::ostringstream os;
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  os << pad(sweep_name(kind), 10) << pad("ROC AUC", 16) << pad("PRC AUC", 16)
     << "P@n\n";
  for (const auto& pt : points) {
    os << pad(pt.label(kind), 10);
    for (std::size_t m = 0; m < kMetricCount; ++m) {
      const auto metric = static_cast<Metric>(m);
      auto cell = text::format_fixed(pt.result.mean(metric), 3) + " +- " +
                  text::format_fixed(pt.result.stddev(metric), 3);
      os << (m + 1 < kMetricCount ? pad(cell, 16) : cell);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace qcad::eval
