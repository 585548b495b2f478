// Copyright 2026 The clipnet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CLIPNET_CLIPNET_H
#define CLIPNET_CLIPNET_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CLIPNET_API __declspec(dllexport)
#else
#define CLIPNET_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum clipnet_status {
  CLIPNET_OK = 0,
  CLIPNET_ERR_INVALID_ARGUMENT = 1,
  CLIPNET_ERR_SHAPE = 2,
  CLIPNET_ERR_NUMERIC = 3,
  CLIPNET_ERR_IO = 4,
  CLIPNET_ERR_PRECONDITION = 5,
  CLIPNET_ERR_INTERNAL = 99
} clipnet_status;

typedef enum clipnet_loss {
  CLIPNET_LOSS_SQUARE = 0,
  CLIPNET_LOSS_LOGISTIC = 1,
  CLIPNET_LOSS_EXPONENTIAL = 2
} clipnet_loss;

typedef struct clipnet_dataset clipnet_dataset;
typedef struct clipnet_model clipnet_model;
typedef struct clipnet_fit_report clipnet_fit_report;
typedef struct clipnet_knn clipnet_knn;

/* Message of the last failed call on this thread ("" if none). */
CLIPNET_API const char* clipnet_last_error(void);
CLIPNET_API const char* clipnet_version(void);
/* Frees strings returned through char** out-parameters. */
CLIPNET_API void clipnet_string_free(char* s);

/* ---- datasets ---- */

CLIPNET_API clipnet_status clipnet_dataset_regression(int function, size_t n, uint64_t seed,
                                                      clipnet_dataset** out);
CLIPNET_API clipnet_status clipnet_dataset_toy(size_t dim, size_t n, uint64_t seed,
                                               clipnet_dataset** out);
CLIPNET_API clipnet_status clipnet_dataset_from_csv(const char* path, const char* label_column,
                                                    int classification, clipnet_dataset** out);
/* x is row-major n x dim. */
CLIPNET_API clipnet_status clipnet_dataset_from_arrays(const double* x, const double* y, size_t n,
                                                       size_t dim, int classification,
                                                       clipnet_dataset** out);
/* meta_path may be NULL. */
CLIPNET_API clipnet_status clipnet_dataset_write(const clipnet_dataset* data, const char* csv_path,
                                                 const char* meta_path);
CLIPNET_API size_t clipnet_dataset_size(const clipnet_dataset* data);
CLIPNET_API size_t clipnet_dataset_dim(const clipnet_dataset* data);
/* Copies row i: dim features into x (may be NULL) and the target into y (may be NULL). */
CLIPNET_API clipnet_status clipnet_dataset_row(const clipnet_dataset* data, size_t i, double* x,
                                               double* y);
CLIPNET_API void clipnet_dataset_free(clipnet_dataset* data);

/* c_m from `samples` Monte Carlo draws (0: the cached 10^6-sample value). */
CLIPNET_API clipnet_status clipnet_calibrate(int function, size_t samples, uint64_t seed,
                                             double* c_m);
/* Sample Var(noise) / Var(Y) of the calibrated generator. */
CLIPNET_API clipnet_status clipnet_noise_share(int function, size_t samples, uint64_t seed,
                                               double* share);

/* ---- networks ---- */

/* activation: "relu", "sigmoid", "leaky_relu:0.1", ... Glorot init from seed. */
CLIPNET_API clipnet_status clipnet_model_create(size_t input_dim, const size_t* hidden,
                                                size_t depth, const char* activation,
                                                uint64_t seed, clipnet_model** out);
CLIPNET_API size_t clipnet_model_param_count(const clipnet_model* model);
CLIPNET_API clipnet_status clipnet_model_get_params(const clipnet_model* model, double* theta,
                                                    size_t len);
CLIPNET_API clipnet_status clipnet_model_set_params(clipnet_model* model, const double* theta,
                                                    size_t len);
/* x is row-major n x input_dim; out has n entries. */
CLIPNET_API clipnet_status clipnet_model_predict(const clipnet_model* model, const double* x,
                                                 size_t n, double* out);
/* Empirical risk and (if grad != NULL) its gradient, param_count entries. */
CLIPNET_API clipnet_status clipnet_model_risk(const clipnet_model* model,
                                              const clipnet_dataset* data, clipnet_loss loss,
                                              double* risk, double* grad);
/* Fraction of exactly nonzero parameters. */
CLIPNET_API double clipnet_model_sparsity(const clipnet_model* model);
CLIPNET_API void clipnet_model_free(clipnet_model* model);

/* ---- training ---- */

typedef struct clipnet_optimizer_config {
  double eta;
  size_t k_bar;
  size_t outer_iters; /* Adam: number of steps */
  size_t batch_size;  /* 0: full batch */
  int paper_default;  /* 0: strict monotone policy */
  uint64_t seed;
  double early_stop_tol;
  size_t early_stop_patience;
  size_t max_halvings;
} clipnet_optimizer_config;

typedef struct clipnet_trace_record {
  size_t iteration;
  double objective;
  double risk;
  double penalty;
  double sparsity;
  size_t inner_steps;
  double eta;
  int decreased;
} clipnet_trace_record;

typedef void (*clipnet_trace_fn)(const clipnet_trace_record* record, void* user);

CLIPNET_API void clipnet_optimizer_config_default(clipnet_optimizer_config* cfg);

/* Clipped-L1 CCCP fit starting from the model's current parameters, which are
   replaced by the result. trace and report may be NULL. */
CLIPNET_API clipnet_status clipnet_fit_sdnn(clipnet_model* model, const clipnet_dataset* data,
                                            clipnet_loss loss, double lambda, double tau,
                                            const clipnet_optimizer_config* cfg,
                                            clipnet_trace_fn trace, void* user,
                                            clipnet_fit_report** report);
/* Unpenalised Adam fit from the model's current parameters. */
CLIPNET_API clipnet_status clipnet_fit_adam(clipnet_model* model, const clipnet_dataset* data,
                                            clipnet_loss loss, const clipnet_optimizer_config* cfg,
                                            clipnet_trace_fn trace, void* user,
                                            clipnet_fit_report** report);

CLIPNET_API size_t clipnet_fit_report_length(const clipnet_fit_report* report);
CLIPNET_API clipnet_status clipnet_fit_report_record(const clipnet_fit_report* report, size_t i,
                                                     clipnet_trace_record* out);
CLIPNET_API double clipnet_fit_report_initial_objective(const clipnet_fit_report* report);
CLIPNET_API int clipnet_fit_report_stalled(const clipnet_fit_report* report);
CLIPNET_API int clipnet_fit_report_early_stopped(const clipnet_fit_report* report);
CLIPNET_API void clipnet_fit_report_free(clipnet_fit_report* report);

/* ---- k nearest neighbours ---- */

CLIPNET_API clipnet_status clipnet_knn_create(const clipnet_dataset* data, size_t k,
                                              clipnet_knn** out);
CLIPNET_API clipnet_status clipnet_knn_predict(const clipnet_knn* knn, const double* x, size_t n,
                                               double* out);
CLIPNET_API void clipnet_knn_free(clipnet_knn* knn);

/* ---- theory ---- */

CLIPNET_API double clipnet_lipschitz_bound(double L, double N, double B);
CLIPNET_API clipnet_status clipnet_covering_bound(double L, double N, double B, double S,
                                                  double delta, double* value, int* vacuous);
CLIPNET_API clipnet_status clipnet_covering_bound_clipped(double L, double N, double B, double S,
                                                          double delta, double tau, double* value,
                                                          int* vacuous);
/* which: "lipschitz", "covering" or "identity". Result as a JSON document. */
CLIPNET_API clipnet_status clipnet_theory_check(const char* which, uint64_t seed, char** json);

/* ---- experiments ---- */

/* Runs the experiment described by a JSON config; returns summary.json. */
CLIPNET_API clipnet_status clipnet_run_experiment(const char* config_json, char** summary_json);
/* The default configuration as JSON. */
CLIPNET_API clipnet_status clipnet_default_config(char** config_json);

#ifdef __cplusplus
}
#endif

#endif
