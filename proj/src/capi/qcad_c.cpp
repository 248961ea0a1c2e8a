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

#include "qcad/qcad.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dataset.hpp"
#include "error.hpp"
#include "experiment.hpp"
#include "explain.hpp"
#include "gower.hpp"
#include "metrics.hpp"
#include "scoring.hpp"
#include "synth.hpp"
#include "text.hpp"

struct qcad_dataset {
  qcad::data::Dataset ds;
  std::vector<std::string> contextual_names;
  std::vector<std::string> behavioral_names;

  explicit qcad_dataset(qcad::data::Dataset d) : ds(std::move(d)) {
    const auto& schema = ds.schema();
    for (std::size_t f : schema.contextual())
      contextual_names.push_back(schema.feature(f).name);
    for (std::size_t f : schema.behavioral())
      behavioral_names.push_back(schema.feature(f).name);
  }
};

struct qcad_injection {
  qcad::synth::InjectionRecord record;
};

struct qcad_scores {
  std::vector<std::string> features;
  std::vector<qcad::ObjectScore> entries;
};

struct qcad_trials {
  qcad::eval::TrialResult result;
};

struct qcad_sweep {
  qcad::eval::SweepKind kind;
  std::vector<qcad_trials> results;
  std::vector<std::string> labels;
  std::string table;
  std::string csv;
};

namespace {

thread_local std::string g_last_error;

qcad_status fail(qcad_status status, const char* message) {
  g_last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
qcad_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return QCAD_OK;
  } catch (const qcad::ParameterError& e) {
    return fail(QCAD_ERR_ARGUMENT, e.what());
  } catch (const qcad::DataError& e) {
    return fail(QCAD_ERR_DATA, e.what());
  } catch (const qcad::IoError& e) {
    return fail(QCAD_ERR_IO, e.what());
  } catch (const qcad::MetricError& e) {
    return fail(QCAD_ERR_METRIC, e.what());
  } catch (const std::bad_alloc&) {
    return fail(QCAD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(QCAD_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(QCAD_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw qcad::ParameterError(what);
}

qcad::QcadParams to_params(const qcad_params* p) {
  qcad::QcadParams out;
  if (p == nullptr) return out;
  out.k = p->k;
  out.n_q = p->n_q;
  out.n_trees = p->n_trees;
  out.max_features = p->max_features;
  out.min_samples_split = p->min_samples_split;
  if (p->clip)
    out.eta = p->eta;
  else
    out.eta.reset();
  out.scaling = p->scaling != 0;
  out.seed = p->seed;
  out.threads = p->threads;
  return out;
}

qcad::eval::Metric to_metric(qcad_metric m) {
  switch (m) {
    case QCAD_METRIC_ROC_AUC: return qcad::eval::kRocAuc;
    case QCAD_METRIC_PR_AUC: return qcad::eval::kPrAuc;
    case QCAD_METRIC_P_AT_N: return qcad::eval::kPrecisionAtN;
  }
  throw qcad::ParameterError("unknown metric");
}

qcad::gower::DistanceMatrix cached_matrix(const qcad::data::Dataset& ds,
                                          const char* path, unsigned threads) {
  if (path != nullptr && std::filesystem::exists(path)) {
    auto m = qcad::gower::DistanceMatrix::load(path);
    if (m.size() == ds.size()) return m;
  }
  auto m = qcad::gower::distance_matrix(ds, threads);
  if (path != nullptr) m.save(path);
  return m;
}

// Feature names end up in file names.
std::string file_token(std::string_view name) {
  std::string out;
  for (char c : name) {
    bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    out.push_back(safe ? c : '_');
  }
  return out;
}

std::vector<std::uint8_t> label_vector(const std::uint8_t* labels, std::size_t n) {
  return std::vector<std::uint8_t>(labels, labels + n);
}

}  // namespace

extern "C" {

const char* qcad_status_string(qcad_status status) {
  switch (status) {
    case QCAD_OK: return "ok";
    case QCAD_ERR_ARGUMENT: return "invalid argument";
    case QCAD_ERR_DATA: return "data error";
    case QCAD_ERR_IO: return "i/o error";
    case QCAD_ERR_METRIC: return "undefined metric";
    case QCAD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* qcad_last_error(void) { return g_last_error.c_str(); }

void qcad_params_init(qcad_params* params) {
  if (params == nullptr) return;
  qcad::QcadParams d;
  params->k = d.k;
  params->n_q = d.n_q;
  params->n_trees = d.n_trees;
  params->max_features = d.max_features;
  params->min_samples_split = d.min_samples_split;
  params->clip = d.eta.has_value();
  params->eta = d.eta.value_or(10.0);
  params->scaling = d.scaling;
  params->seed = d.seed;
  params->threads = d.threads;
}

void qcad_scheme_spec_init(qcad_scheme_spec* spec) {
  if (spec == nullptr) return;
  qcad::synth::SchemeSpec d;
  spec->scheme = static_cast<int>(d.scheme);
  spec->n = d.n;
  spec->p = d.p;
  spec->p_cat = d.p_cat;
  spec->q = d.q;
  spec->seed = d.seed;
}

qcad_status qcad_scheme_parse(const char* name, int* scheme) {
  return guarded([&] {
    require(name != nullptr && scheme != nullptr, "null argument");
    auto s = qcad::synth::parse_scheme(name);
    if (!s) throw qcad::ParameterError(std::string("unknown scheme: ") + name);
    *scheme = static_cast<int>(*s);
  });
}

qcad_status qcad_dataset_load_csv(const char* csv_path, const char* schema_path,
                                  qcad_dataset** out) {
  return guarded([&] {
    require(csv_path != nullptr && schema_path != nullptr && out != nullptr,
            "null argument");
    auto schema = qcad::data::FeatureSchema::load(schema_path);
    *out = new qcad_dataset(qcad::data::load_csv(csv_path, schema));
  });
}

qcad_status qcad_dataset_synthesize(const qcad_scheme_spec* spec,
                                    qcad_dataset** out) {
  return guarded([&] {
    require(spec != nullptr && out != nullptr, "null argument");
    require(spec->scheme >= 1 && spec->scheme <= 5, "scheme must be 1..5");
    qcad::synth::SchemeSpec s;
    s.scheme = static_cast<qcad::synth::Scheme>(spec->scheme);
    s.n = spec->n;
    s.p = spec->p;
    s.p_cat = spec->p_cat;
    s.q = spec->q;
    s.seed = spec->seed;
    *out = new qcad_dataset(qcad::synth::make_synthetic(s));
  });
}

qcad_status qcad_dataset_normalize(const qcad_dataset* ds, qcad_dataset** out) {
  return guarded([&] {
    require(ds != nullptr && out != nullptr, "null argument");
    *out = new qcad_dataset(qcad::data::minmax_normalize(ds->ds));
  });
}

qcad_status qcad_dataset_inject(const qcad_dataset* ds, size_t m, uint64_t seed,
                                qcad_dataset** out, qcad_injection** record) {
  return guarded([&] {
    require(ds != nullptr && out != nullptr, "null argument");
    auto [injected, rec] = qcad::synth::inject_anomalies(ds->ds, m, seed);
    auto d = std::make_unique<qcad_dataset>(std::move(injected));
    if (record != nullptr) *record = new qcad_injection{std::move(rec)};
    *out = d.release();
  });
}

qcad_status qcad_dataset_save(const qcad_dataset* ds, const char* csv_path,
                              const char* schema_path) {
  return guarded([&] {
    require(ds != nullptr && csv_path != nullptr, "null argument");
    qcad::data::save_csv(ds->ds, csv_path);
    if (schema_path != nullptr)
      qcad::data::save_schema(ds->ds.schema(), schema_path);
  });
}

void qcad_dataset_free(qcad_dataset* ds) { delete ds; }

size_t qcad_dataset_rows(const qcad_dataset* ds) {
  return ds ? ds->ds.size() : 0;
}

size_t qcad_dataset_contextual_count(const qcad_dataset* ds) {
  return ds ? ds->contextual_names.size() : 0;
}

size_t qcad_dataset_behavioral_count(const qcad_dataset* ds) {
  return ds ? ds->behavioral_names.size() : 0;
}

const char* qcad_dataset_contextual_name(const qcad_dataset* ds, size_t p) {
  if (ds == nullptr || p >= ds->contextual_names.size()) return nullptr;
  return ds->contextual_names[p].c_str();
}

const char* qcad_dataset_behavioral_name(const qcad_dataset* ds, size_t q) {
  if (ds == nullptr || q >= ds->behavioral_names.size()) return nullptr;
  return ds->behavioral_names[q].c_str();
}

int qcad_dataset_has_labels(const qcad_dataset* ds) {
  return ds != nullptr && ds->ds.has_labels();
}

size_t qcad_dataset_warning_count(const qcad_dataset* ds) {
  return ds ? ds->ds.warnings().size() : 0;
}

const char* qcad_dataset_warning(const qcad_dataset* ds, size_t i) {
  if (ds == nullptr || i >= ds->ds.warnings().size()) return nullptr;
  return ds->ds.warnings()[i].c_str();
}

size_t qcad_injection_count(const qcad_injection* record) {
  return record ? record->record.indices.size() : 0;
}

qcad_status qcad_injection_save_json(const qcad_injection* record,
                                     const char* path) {
  return guarded([&] {
    require(record != nullptr && path != nullptr, "null argument");
    qcad::text::write_file(path, record->record.to_json());
  });
}

void qcad_injection_free(qcad_injection* record) { delete record; }

qcad_status qcad_detect(const qcad_dataset* ds, const qcad_params* params,
                        const char* distance_cache, qcad_scores** out) {
  return guarded([&] {
    require(ds != nullptr && out != nullptr, "null argument");
    auto p = to_params(params);
    p.validate(ds->ds.size());
    auto m = cached_matrix(ds->ds, distance_cache, p.threads);
    auto s = std::make_unique<qcad_scores>();
    s->features = ds->behavioral_names;
    s->entries = qcad::score_all(ds->ds, m, p);
    *out = s.release();
  });
}

qcad_status qcad_scores_save_jsonl(const qcad_scores* scores, const char* path) {
  return guarded([&] {
    require(scores != nullptr && path != nullptr, "null argument");
    std::string out;
    for (const auto& e : scores->entries) {
      nlohmann::ordered_json line;
      line["index"] = e.index;
      line["final_score"] = e.final_score;
      nlohmann::ordered_json partial = nlohmann::ordered_json::object();
      for (std::size_t q = 0; q < scores->features.size(); ++q)
        partial[scores->features[q]] = e.partial_scores[q];
      line["partial_scores"] = std::move(partial);
      line["reference_group"] = e.reference_group.members;
      out += line.dump();
      out += '\n';
    }
    qcad::text::write_file(path, out);
  });
}

qcad_status qcad_scores_load_jsonl(const char* path, qcad_scores** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    std::string text = qcad::text::read_file(path);
    auto s = std::make_unique<qcad_scores>();
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      std::string_view line(text.data() + pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (qcad::text::trim(line).empty()) continue;
      auto where = [&] { return path + std::string(":") + std::to_string(line_no); };
      try {
        auto j = nlohmann::ordered_json::parse(line);
        qcad::ObjectScore e;
        e.index = j.at("index").get<std::size_t>();
        e.final_score = j.at("final_score").get<double>();
        std::vector<std::string> names;
        for (const auto& [name, v] : j.at("partial_scores").items()) {
          names.push_back(name);
          e.partial_scores.push_back(v.get<double>());
        }
        e.reference_group.center = e.index;
        e.reference_group.members =
            j.at("reference_group").get<std::vector<std::size_t>>();
        if (s->entries.empty())
          s->features = names;
        else if (names != s->features)
          throw qcad::DataError(where() + ": partial score features differ");
        if (e.index != s->entries.size())
          throw qcad::DataError(where() + ": expected index " +
                                std::to_string(s->entries.size()));
        s->entries.push_back(std::move(e));
      } catch (const nlohmann::json::exception& ex) {
        throw qcad::DataError(where() + ": " + ex.what());
      }
    }
    *out = s.release();
  });
}

void qcad_scores_free(qcad_scores* scores) { delete scores; }

size_t qcad_scores_count(const qcad_scores* scores) {
  return scores ? scores->entries.size() : 0;
}

size_t qcad_scores_feature_count(const qcad_scores* scores) {
  return scores ? scores->features.size() : 0;
}

double qcad_scores_final(const qcad_scores* scores, size_t i) {
  if (scores == nullptr || i >= scores->entries.size())
    return std::numeric_limits<double>::quiet_NaN();
  return scores->entries[i].final_score;
}

double qcad_scores_partial(const qcad_scores* scores, size_t i, size_t q) {
  if (scores == nullptr || i >= scores->entries.size() ||
      q >= scores->features.size())
    return std::numeric_limits<double>::quiet_NaN();
  return scores->entries[i].partial_scores[q];
}

qcad_status qcad_scores_top(const qcad_scores* scores, size_t n,
                            size_t* indices) {
  return guarded([&] {
    require(scores != nullptr && indices != nullptr, "null argument");
    require(n <= scores->entries.size(), "n exceeds the number of objects");
    std::vector<double> finals;
    for (const auto& e : scores->entries) finals.push_back(e.final_score);
    auto order = qcad::eval::rank_by_score(finals);
    std::copy_n(order.begin(), n, indices);
  });
}

qcad_status qcad_explain(const qcad_dataset* ds, const qcad_scores* scores,
                         size_t index, const qcad_params* params, size_t h,
                         const char* out_dir) {
  return guarded([&] {
    require(ds != nullptr && scores != nullptr && out_dir != nullptr,
            "null argument");
    const auto& data = ds->ds;
    require(index < scores->entries.size(), "object index out of range");
    if (scores->entries.size() != data.size())
      throw qcad::DataError("scores describe " +
                            std::to_string(scores->entries.size()) +
                            " objects, dataset has " +
                            std::to_string(data.size()));
    if (scores->features != ds->behavioral_names)
      throw qcad::DataError("scores and dataset behavioral features differ");
    const auto& entry = scores->entries[index];
    for (std::size_t r : entry.reference_group.members)
      if (r >= data.size() || r == index)
        throw qcad::DataError("invalid reference group member " +
                              std::to_string(r));
    auto p = to_params(params);
    if (h == 0) h = std::min<std::size_t>(ds->behavioral_names.size(), 3);

    std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw qcad::IoError("cannot create " + dir.string() + ": " + ec.message());
    std::string stem = "object_" + std::to_string(index);

    auto explanation = qcad::explain::explain(entry, data, h);
    qcad::text::write_file((dir / (stem + ".json")).string(), explanation.to_json());

    auto u = qcad::contextual_row(data, index);
    for (std::size_t q = 0; q < ds->behavioral_names.size(); ++q) {
      auto forest = qcad::fit_group_forest(data, entry.reference_group, q, p);
      auto profile = qcad::percentile_profile(forest, u, p.n_q);
      const auto& name = ds->behavioral_names[q];
      qcad::text::write_file(
          (dir / (stem + "_beanplot_" + file_token(name) + ".svg")).string(),
          qcad::explain::render_beanplot(profile, data.behavioral(index, q), name));
    }
    for (const auto& hist : explanation.group_profile)
      qcad::text::write_file(
          (dir / (stem + "_group_" + file_token(hist.feature) + ".svg")).string(),
          qcad::explain::render_histogram(hist));
  });
}

qcad_status qcad_roc_auc(const double* scores, const uint8_t* labels, size_t n,
                         double* out) {
  return guarded([&] {
    require(scores != nullptr && labels != nullptr && out != nullptr,
            "null argument");
    *out = qcad::eval::roc_auc({scores, n}, label_vector(labels, n));
  });
}

qcad_status qcad_pr_auc(const double* scores, const uint8_t* labels, size_t n,
                        double* out) {
  return guarded([&] {
    require(scores != nullptr && labels != nullptr && out != nullptr,
            "null argument");
    *out = qcad::eval::pr_auc({scores, n}, label_vector(labels, n));
  });
}

qcad_status qcad_precision_at_n(const double* scores, const uint8_t* labels,
                                size_t n, size_t top, double* out) {
  return guarded([&] {
    require(scores != nullptr && labels != nullptr && out != nullptr,
            "null argument");
    *out = qcad::eval::precision_at_n({scores, n}, label_vector(labels, n), top);
  });
}

qcad_status qcad_run_trials(const qcad_dataset* base, const qcad_params* params,
                            size_t trials, double inject_rate, uint64_t seed,
                            qcad_trials** out) {
  return guarded([&] {
    require(base != nullptr && out != nullptr, "null argument");
    qcad::eval::TrialOptions options{trials, inject_rate, seed};
    *out = new qcad_trials{qcad::eval::run_trials(base->ds, to_params(params), options)};
  });
}

size_t qcad_trials_count(const qcad_trials* trials) {
  return trials ? trials->result.trials() : 0;
}

double qcad_trials_value(const qcad_trials* trials, qcad_metric metric,
                         size_t trial) {
  if (trials == nullptr || trial >= trials->result.trials() ||
      static_cast<unsigned>(metric) >= qcad::eval::kMetricCount)
    return std::numeric_limits<double>::quiet_NaN();
  return trials->result.values[metric][trial];
}

double qcad_trials_mean(const qcad_trials* trials, qcad_metric metric) {
  if (trials == nullptr || static_cast<unsigned>(metric) >= qcad::eval::kMetricCount)
    return std::numeric_limits<double>::quiet_NaN();
  return trials->result.mean(to_metric(metric));
}

double qcad_trials_std(const qcad_trials* trials, qcad_metric metric) {
  if (trials == nullptr || static_cast<unsigned>(metric) >= qcad::eval::kMetricCount)
    return std::numeric_limits<double>::quiet_NaN();
  return trials->result.stddev(to_metric(metric));
}

qcad_status qcad_trials_save_csv(const qcad_trials* trials, const char* path) {
  return guarded([&] {
    require(trials != nullptr && path != nullptr, "null argument");
    qcad::text::write_file(path, qcad::eval::trials_csv(trials->result));
  });
}

void qcad_trials_free(qcad_trials* trials) { delete trials; }

qcad_status qcad_run_sweep(const qcad_dataset* base, const qcad_params* params,
                           qcad_sweep_kind kind, const double* values,
                           size_t count, size_t trials, double inject_rate,
                           uint64_t seed, qcad_sweep** out) {
  return guarded([&] {
    require(base != nullptr && out != nullptr, "null argument");
    require(values != nullptr || count == 0, "null values");
    qcad::eval::SweepKind k;
    switch (kind) {
      case QCAD_SWEEP_K: k = qcad::eval::SweepKind::kK; break;
      case QCAD_SWEEP_ETA: k = qcad::eval::SweepKind::kEta; break;
      case QCAD_SWEEP_SCALING: k = qcad::eval::SweepKind::kScaling; break;
      default: throw qcad::ParameterError("unknown sweep kind");
    }
    std::vector<std::optional<double>> vals;
    for (size_t i = 0; i < count; ++i) {
      if (std::isnan(values[i]))
        vals.emplace_back();
      else
        vals.emplace_back(values[i]);
    }
    qcad::eval::TrialOptions options{trials, inject_rate, seed};
    auto points = qcad::eval::sweep(base->ds, to_params(params), options, k, vals);
    auto s = std::make_unique<qcad_sweep>();
    s->kind = k;
    for (const auto& pt : points) {
      s->results.push_back(qcad_trials{pt.result});
      s->labels.push_back(pt.label(k));
    }
    s->table = qcad::eval::sweep_table(k, points);
    s->csv = qcad::eval::sweep_csv(k, points);
    *out = s.release();
  });
}

size_t qcad_sweep_count(const qcad_sweep* sweep) {
  return sweep ? sweep->results.size() : 0;
}

const qcad_trials* qcad_sweep_result(const qcad_sweep* sweep, size_t i) {
  if (sweep == nullptr || i >= sweep->results.size()) return nullptr;
  return &sweep->results[i];
}

const char* qcad_sweep_label(const qcad_sweep* sweep, size_t i) {
  if (sweep == nullptr || i >= sweep->labels.size()) return nullptr;
  return sweep->labels[i].c_str();
}

const char* qcad_sweep_table(const qcad_sweep* sweep) {
  return sweep ? sweep->table.c_str() : nullptr;
}

qcad_status qcad_sweep_save_csv(const qcad_sweep* sweep, const char* path) {
  return guarded([&] {
    require(sweep != nullptr && path != nullptr, "null argument");
    qcad::text::write_file(path, sweep->csv);
  });
}

void qcad_sweep_free(qcad_sweep* sweep) { delete sweep; }

}  // extern "C"
