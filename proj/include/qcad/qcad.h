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

/* C interface to the QCAD contextual anomaly detection library.
 *
 * All objects are opaque handles created by a qcad_*_load / _synthesize /
 * _detect style call and released with the matching qcad_*_free. Every
 * fallible call returns a qcad_status; on failure qcad_last_error() returns a
 * message describing the most recent error on the calling thread. Output
 * handles are only written on success.
 *
 * Scores in this interface are raw library values in [0, eta / 100].
 */

#ifndef QCAD_QCAD_H_
#define QCAD_QCAD_H_

#include <stddef.h>
#include <stdint.h>

#if defined(QCAD_BUILDING_LIBRARY)
#define QCAD_API __attribute__((visibility("default")))
#else
#define QCAD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qcad_status {
  QCAD_OK = 0,
  QCAD_ERR_ARGUMENT = 1, /* parameter out of range, null handle */
  QCAD_ERR_DATA = 2,     /* malformed or inconsistent input data */
  QCAD_ERR_IO = 3,       /* file could not be read or written */
  QCAD_ERR_METRIC = 4,   /* metric undefined for the given labels */
  QCAD_ERR_INTERNAL = 5
} qcad_status;

QCAD_API const char* qcad_status_string(qcad_status status);
QCAD_API const char* qcad_last_error(void);

typedef struct qcad_dataset qcad_dataset;
typedef struct qcad_injection qcad_injection;
typedef struct qcad_scores qcad_scores;
typedef struct qcad_trials qcad_trials;
typedef struct qcad_sweep qcad_sweep;

/* ---------------------------------------------------------------- params */

typedef struct qcad_params {
  size_t k;                 /* reference group size; 0 = min(N/2, 500) */
  size_t n_q;               /* quantile grid size (100 = percentiles) */
  size_t n_trees;           /* trees per forest */
  size_t max_features;      /* features tried per split; 0 = all */
  size_t min_samples_split; /* smaller nodes become leaves */
  int clip;                 /* nonzero: cap partial scores at eta / 100 */
  double eta;
  int scaling;              /* nonzero: scale out-of-support widths by IQR */
  uint64_t seed;
  unsigned threads;         /* 0 = all hardware threads */
} qcad_params;

/* k=0, n_q=100, n_trees=10, max_features=0, min_samples_split=10, clip=1,
 * eta=10, scaling=1, seed=0, threads=1. */
QCAD_API void qcad_params_init(qcad_params* params);

typedef struct qcad_scheme_spec {
  int scheme; /* 1..5 */
  size_t n;
  size_t p;     /* contextual features */
  size_t p_cat; /* of which categorical */
  size_t q;     /* behavioral features */
  uint64_t seed;
} qcad_scheme_spec;

/* scheme=1, n=2000, p=5, p_cat=2, q=5, seed=0. */
QCAD_API void qcad_scheme_spec_init(qcad_scheme_spec* spec);
/* Accepts "s1".."s5" (any case). */
QCAD_API qcad_status qcad_scheme_parse(const char* name, int* scheme);

/* -------------------------------------------------------------- datasets */

QCAD_API qcad_status qcad_dataset_load_csv(const char* csv_path,
                                           const char* schema_path,
                                           qcad_dataset** out);
/* Generated dataset with behavioral features already normalized. */
QCAD_API qcad_status qcad_dataset_synthesize(const qcad_scheme_spec* spec,
                                             qcad_dataset** out);
QCAD_API qcad_status qcad_dataset_normalize(const qcad_dataset* ds,
                                            qcad_dataset** out);
/* `record` may be null. */
QCAD_API qcad_status qcad_dataset_inject(const qcad_dataset* ds, size_t m,
                                         uint64_t seed, qcad_dataset** out,
                                         qcad_injection** record);
/* `schema_path` may be null. */
QCAD_API qcad_status qcad_dataset_save(const qcad_dataset* ds,
                                       const char* csv_path,
                                       const char* schema_path);
QCAD_API void qcad_dataset_free(qcad_dataset* ds);

QCAD_API size_t qcad_dataset_rows(const qcad_dataset* ds);
QCAD_API size_t qcad_dataset_contextual_count(const qcad_dataset* ds);
QCAD_API size_t qcad_dataset_behavioral_count(const qcad_dataset* ds);
QCAD_API const char* qcad_dataset_contextual_name(const qcad_dataset* ds,
                                                  size_t p);
QCAD_API const char* qcad_dataset_behavioral_name(const qcad_dataset* ds,
                                                  size_t q);
QCAD_API int qcad_dataset_has_labels(const qcad_dataset* ds);
QCAD_API size_t qcad_dataset_warning_count(const qcad_dataset* ds);
QCAD_API const char* qcad_dataset_warning(const qcad_dataset* ds, size_t i);

QCAD_API size_t qcad_injection_count(const qcad_injection* record);
/* {"indices": [...], "deltas": [[...], ...]} */
QCAD_API qcad_status qcad_injection_save_json(const qcad_injection* record,
                                              const char* path);
QCAD_API void qcad_injection_free(qcad_injection* record);

/* ------------------------------------------------------------- detection */

/* Scores every object. `distance_cache` may be null; otherwise the Gower
 * matrix is read from that file when it exists with a matching size, and
 * written to it after computation when it does not. */
QCAD_API qcad_status qcad_detect(const qcad_dataset* ds,
                                 const qcad_params* params,
                                 const char* distance_cache,
                                 qcad_scores** out);

/* JSON Lines, one object per line:
 * {"index":i,"final_score":s,"partial_scores":{name:s,...},
 *  "reference_group":[...]} */
QCAD_API qcad_status qcad_scores_save_jsonl(const qcad_scores* scores,
                                            const char* path);
QCAD_API qcad_status qcad_scores_load_jsonl(const char* path,
                                            qcad_scores** out);
QCAD_API void qcad_scores_free(qcad_scores* scores);

QCAD_API size_t qcad_scores_count(const qcad_scores* scores);
QCAD_API size_t qcad_scores_feature_count(const qcad_scores* scores);
/* Entry i describes object i. */
QCAD_API double qcad_scores_final(const qcad_scores* scores, size_t i);
QCAD_API double qcad_scores_partial(const qcad_scores* scores, size_t i,
                                    size_t q);
/* The n highest-scored objects, ties by ascending index. */
QCAD_API qcad_status qcad_scores_top(const qcad_scores* scores, size_t n,
                                     size_t* indices);

/* Writes into `out_dir`:
 *   object_<i>.json                      explanation
 *   object_<i>_beanplot_<feature>.svg    one per behavioral feature
 *   object_<i>_group_<feature>.svg       one per contextual feature
 * The forests are refit on the stored reference group, so `params` must
 * match the detection run. h = 0 selects min(Q, 3) top features. */
QCAD_API qcad_status qcad_explain(const qcad_dataset* ds,
                                  const qcad_scores* scores, size_t index,
                                  const qcad_params* params, size_t h,
                                  const char* out_dir);

/* --------------------------------------------------------------- metrics */

QCAD_API qcad_status qcad_roc_auc(const double* scores, const uint8_t* labels,
                                  size_t n, double* out);
QCAD_API qcad_status qcad_pr_auc(const double* scores, const uint8_t* labels,
                                 size_t n, double* out);
QCAD_API qcad_status qcad_precision_at_n(const double* scores,
                                         const uint8_t* labels, size_t n,
                                         size_t top, double* out);

/* ----------------------------------------------------------- experiments */

typedef enum qcad_metric {
  QCAD_METRIC_ROC_AUC = 0,
  QCAD_METRIC_PR_AUC = 1,
  QCAD_METRIC_P_AT_N = 2
} qcad_metric;

typedef enum qcad_sweep_kind {
  QCAD_SWEEP_K = 0,
  QCAD_SWEEP_ETA = 1,    /* a NaN value means "no clipping" */
  QCAD_SWEEP_SCALING = 2 /* values 1 (on) / 0 (off) */
} qcad_sweep_kind;

/* `base` must be normalized. Trial t injects round(rate * N) anomalies. */
QCAD_API qcad_status qcad_run_trials(const qcad_dataset* base,
                                     const qcad_params* params, size_t trials,
                                     double inject_rate, uint64_t seed,
                                     qcad_trials** out);
QCAD_API size_t qcad_trials_count(const qcad_trials* trials);
QCAD_API double qcad_trials_value(const qcad_trials* trials,
                                  qcad_metric metric, size_t trial);
QCAD_API double qcad_trials_mean(const qcad_trials* trials, qcad_metric metric);
/* Sample standard deviation; 0 for a single trial. */
QCAD_API double qcad_trials_std(const qcad_trials* trials, qcad_metric metric);
QCAD_API qcad_status qcad_trials_save_csv(const qcad_trials* trials,
                                          const char* path);
QCAD_API void qcad_trials_free(qcad_trials* trials);

QCAD_API qcad_status qcad_run_sweep(const qcad_dataset* base,
                                    const qcad_params* params,
                                    qcad_sweep_kind kind, const double* values,
                                    size_t count, size_t trials,
                                    double inject_rate, uint64_t seed,
                                    qcad_sweep** out);
QCAD_API size_t qcad_sweep_count(const qcad_sweep* sweep);
/* Borrowed; valid until the sweep is freed. */
QCAD_API const qcad_trials* qcad_sweep_result(const qcad_sweep* sweep,
                                              size_t i);
QCAD_API const char* qcad_sweep_label(const qcad_sweep* sweep, size_t i);
QCAD_API const char* qcad_sweep_table(const qcad_sweep* sweep);
QCAD_API qcad_status qcad_sweep_save_csv(const qcad_sweep* sweep,
                                         const char* path);
QCAD_API void qcad_sweep_free(qcad_sweep* sweep);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* QCAD_QCAD_H_ */
