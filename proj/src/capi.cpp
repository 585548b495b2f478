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

#include "clipnet/clipnet.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include <json.hpp>

#include "clipnet/datagen.hpp"
#include "clipnet/error.hpp"
#include "clipnet/harness.hpp"
#include "clipnet/knn.hpp"
#include "clipnet/network.hpp"
#include "clipnet/optimizer.hpp"
#include "clipnet/theory.hpp"

struct clipnet_dataset {
  clipnet::Dataset data;
};

struct clipnet_model {
  clipnet::MlpSpec spec;
  Eigen::VectorXd theta;
};

struct clipnet_fit_report {
  clipnet::FitReport report;
};

struct clipnet_knn {
  clipnet::KnnModel model;
};

namespace {

thread_local std::string g_last_error;

clipnet_status to_status(clipnet::ErrorCode code) {
  switch (code) {
    case clipnet::ErrorCode::kInvalidArgument: return CLIPNET_ERR_INVALID_ARGUMENT;
    case clipnet::ErrorCode::kShapeMismatch: return CLIPNET_ERR_SHAPE;
    case clipnet::ErrorCode::kNumeric: return CLIPNET_ERR_NUMERIC;
    case clipnet::ErrorCode::kIo: return CLIPNET_ERR_IO;
    case clipnet::ErrorCode::kPrecondition: return CLIPNET_ERR_PRECONDITION;
  }
  return CLIPNET_ERR_INTERNAL;
}

template <typename F>
clipnet_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return CLIPNET_OK;
  } catch (const clipnet::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("json: ") + e.what();
    return CLIPNET_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CLIPNET_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return CLIPNET_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) clipnet::fail(clipnet::ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

clipnet::LossKind to_loss(clipnet_loss loss) {
  switch (loss) {
    case CLIPNET_LOSS_SQUARE: return clipnet::LossKind::kSquare;
    case CLIPNET_LOSS_LOGISTIC: return clipnet::LossKind::kLogistic;
    case CLIPNET_LOSS_EXPONENTIAL: return clipnet::LossKind::kExponential;
  }
  clipnet::fail(clipnet::ErrorCode::kInvalidArgument, "unknown loss kind");
}

clipnet::OptimizerConfig to_optimizer(const clipnet_optimizer_config* c) {
  clipnet::OptimizerConfig opt;
  if (c == nullptr) return opt;
  opt.eta = c->eta;
  opt.k_bar = c->k_bar;
  opt.outer_iters = c->outer_iters;
  if (c->batch_size > 0) opt.batch_size = c->batch_size;
  opt.monotone_policy =
      c->paper_default ? clipnet::MonotonePolicy::kPaperDefault : clipnet::MonotonePolicy::kStrict;
  opt.seed = c->seed;
  opt.early_stop_tol = c->early_stop_tol;
  opt.early_stop_patience = c->early_stop_patience;
  opt.max_halvings = c->max_halvings;
  return opt;
}

clipnet_trace_record to_record(const clipnet::TraceRecord& r) {
  return {r.iteration, r.objective, r.risk, r.penalty, r.sparsity, r.inner_steps, r.eta,
          r.decreased ? 1 : 0};
}

clipnet::TraceSink to_sink(clipnet_trace_fn fn, void* user) {
  if (fn == nullptr) return {};
  return [fn, user](const clipnet::TraceRecord& r) {
    const clipnet_trace_record rec = to_record(r);
    fn(&rec, user);
  };
}

Eigen::MatrixXd row_major(const double* x, size_t n, size_t d) {
  Eigen::MatrixXd m(n, d);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < d; ++j) m(i, j) = x[i * d + j];
  }
  return m;
}

void copy_out(const Eigen::VectorXd& v, double* out) {
  std::memcpy(out, v.data(), static_cast<size_t>(v.size()) * sizeof(double));
}

nlohmann::json covering_table() {
  using clipnet::theory::ClassParams;
  nlohmann::json rows = nlohmann::json::array();
  const double deltas[] = {1e-3, 1e-1, 1.0};
  const double taus[] = {0.0, 1e-6, 1e-4};
  for (double L : {1.0, 2.0, 5.0}) {
    for (double N : {4.0, 100.0}) {
      for (double delta : deltas) {
        ClassParams p{L, N, 1.0, 10.0, delta, 0.0, 1.0};
        const auto plain = clipnet::theory::covering_bound(p);
        nlohmann::json row{{"L", L}, {"N", N}, {"B", 1.0}, {"S", 10.0}, {"delta", delta},
                           {"log_covering", plain.value}, {"vacuous", plain.vacuous}};
        nlohmann::json clipped = nlohmann::json::array();
        for (double tau : taus) {
          p.tau = tau;
          try {
            clipped.push_back({{"tau", tau}, {"log_covering", clipnet::theory::covering_bound_clipped(p).value}});
          } catch (const clipnet::Error& e) {
            clipped.push_back({{"tau", tau}, {"error", e.what()}});
          }
        }
        row["clipped"] = clipped;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

}  // namespace

extern "C" {

const char* clipnet_last_error(void) { return g_last_error.c_str(); }

const char* clipnet_version(void) { return "1.0.0"; }

void clipnet_string_free(char* s) { std::free(s); }

clipnet_status clipnet_dataset_regression(int function, size_t n, uint64_t seed,
                                          clipnet_dataset** out) {
  return guarded([&] {
    need(out, "out");
    *out = new clipnet_dataset{clipnet::gen_regression(function, n, seed)};
  });
}

clipnet_status clipnet_dataset_toy(size_t dim, size_t n, uint64_t seed, clipnet_dataset** out) {
  return guarded([&] {
    need(out, "out");
    *out = new clipnet_dataset{clipnet::gen_classification_toy(dim, n, seed)};
  });
}

clipnet_status clipnet_dataset_from_csv(const char* path, const char* label_column,
                                        int classification, clipnet_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(label_column, "label_column");
    need(out, "out");
    const auto task = classification ? clipnet::Task::kClassification : clipnet::Task::kRegression;
    *out = new clipnet_dataset{clipnet::ingest_csv(path, label_column, task)};
  });
}

clipnet_status clipnet_dataset_from_arrays(const double* x, const double* y, size_t n, size_t dim,
                                           int classification, clipnet_dataset** out) {
  return guarded([&] {
    need(x, "x");
    need(y, "y");
    need(out, "out");
    clipnet::Dataset d;
    d.inputs = row_major(x, n, dim);
    d.targets = Eigen::Map<const Eigen::VectorXd>(y, static_cast<Eigen::Index>(n));
    d.task = classification ? clipnet::Task::kClassification : clipnet::Task::kRegression;
    d.generator = "arrays";
    d.validate();
    *out = new clipnet_dataset{std::move(d)};
  });
}

clipnet_status clipnet_dataset_write(const clipnet_dataset* data, const char* csv_path,
                                     const char* meta_path) {
  return guarded([&] {
    need(data, "data");
    need(csv_path, "csv_path");
    clipnet::write_csv(data->data, csv_path);
    if (meta_path != nullptr) clipnet::write_meta_json(data->data, meta_path);
  });
}

size_t clipnet_dataset_size(const clipnet_dataset* data) { return data ? data->data.size() : 0; }

size_t clipnet_dataset_dim(const clipnet_dataset* data) { return data ? data->data.dim() : 0; }

clipnet_status clipnet_dataset_row(const clipnet_dataset* data, size_t i, double* x, double* y) {
  return guarded([&] {
    need(data, "data");
    if (i >= data->data.size()) {
      clipnet::fail(clipnet::ErrorCode::kInvalidArgument, "row " + std::to_string(i) + " out of range");
    }
    if (x != nullptr) {
      for (size_t j = 0; j < data->data.dim(); ++j) x[j] = data->data.inputs(i, j);
    }
    if (y != nullptr) *y = data->data.targets(i);
  });
}

void clipnet_dataset_free(clipnet_dataset* data) { delete data; }

clipnet_status clipnet_calibrate(int function, size_t samples, uint64_t seed, double* c_m) {
  return guarded([&] {
    need(c_m, "c_m");
    *c_m = samples == 0 ? clipnet::calibrated_constant(function)
                        : clipnet::calibrate_constant(function, samples, seed);
  });
}

clipnet_status clipnet_noise_share(int function, size_t samples, uint64_t seed, double* share) {
  return guarded([&] {
    need(share, "share");
    *share = clipnet::noise_share(function, samples, seed);
  });
}

clipnet_status clipnet_model_create(size_t input_dim, const size_t* hidden, size_t depth,
                                    const char* activation, uint64_t seed, clipnet_model** out) {
  return guarded([&] {
    need(out, "out");
    if (depth > 0) need(hidden, "hidden");
    clipnet::MlpSpec spec;
    spec.input_dim = input_dim;
    spec.hidden_widths.assign(hidden, hidden + depth);
    spec.activation = clipnet::Activation::parse(activation ? activation : "relu");
    spec.validate();
    auto* m = new clipnet_model{spec, clipnet::flatten(clipnet::init_params(spec, seed))};
    *out = m;
  });
}

size_t clipnet_model_param_count(const clipnet_model* model) {
  return model ? static_cast<size_t>(model->theta.size()) : 0;
}

clipnet_status clipnet_model_get_params(const clipnet_model* model, double* theta, size_t len) {
  return guarded([&] {
    need(model, "model");
    need(theta, "theta");
    if (len != static_cast<size_t>(model->theta.size())) {
      clipnet::fail(clipnet::ErrorCode::kShapeMismatch,
                    "expected " + std::to_string(model->theta.size()) + " parameters, got " +
                        std::to_string(len));
    }
    copy_out(model->theta, theta);
  });
}

clipnet_status clipnet_model_set_params(clipnet_model* model, const double* theta, size_t len) {
  return guarded([&] {
    need(model, "model");
    need(theta, "theta");
    // unflatten checks the length
    clipnet::unflatten(model->spec, {theta, len});
    model->theta = Eigen::Map<const Eigen::VectorXd>(theta, static_cast<Eigen::Index>(len));
  });
}

clipnet_status clipnet_model_predict(const clipnet_model* model, const double* x, size_t n,
                                     double* out) {
  return guarded([&] {
    need(model, "model");
    need(x, "x");
    need(out, "out");
    copy_out(clipnet::predict(model->spec, clipnet::as_span(model->theta),
                              row_major(x, n, model->spec.input_dim)),
             out);
  });
}

clipnet_status clipnet_model_risk(const clipnet_model* model, const clipnet_dataset* data,
                                  clipnet_loss loss, double* risk, double* grad) {
  return guarded([&] {
    need(model, "model");
    need(data, "data");
    need(risk, "risk");
    const auto rg =
        clipnet::risk_and_grad(model->spec, clipnet::as_span(model->theta), to_loss(loss), data->data);
    *risk = rg.risk;
    if (grad != nullptr) copy_out(rg.grad, grad);
  });
}

double clipnet_model_sparsity(const clipnet_model* model) {
  return model ? clipnet::sparsity(clipnet::as_span(model->theta)) : 0.0;
}

void clipnet_model_free(clipnet_model* model) { delete model; }

void clipnet_optimizer_config_default(clipnet_optimizer_config* cfg) {
  if (cfg == nullptr) return;
  const clipnet::OptimizerConfig d;
  *cfg = {d.eta, d.k_bar, d.outer_iters, 0, 0, d.seed, d.early_stop_tol, d.early_stop_patience,
          d.max_halvings};
}

clipnet_status clipnet_fit_sdnn(clipnet_model* model, const clipnet_dataset* data,
                                clipnet_loss loss, double lambda, double tau,
                                const clipnet_optimizer_config* cfg, clipnet_trace_fn trace,
                                void* user, clipnet_fit_report** report) {
  return guarded([&] {
    need(model, "model");
    need(data, "data");
    auto result = clipnet::fit_from(model->theta, data->data, model->spec, to_loss(loss),
                                    clipnet::PenaltyConfig{lambda, tau}, to_optimizer(cfg),
                                    to_sink(trace, user));
    model->theta = result.final_theta;
    if (report != nullptr) *report = new clipnet_fit_report{std::move(result)};
  });
}

clipnet_status clipnet_fit_adam(clipnet_model* model, const clipnet_dataset* data,
                                clipnet_loss loss, const clipnet_optimizer_config* cfg,
                                clipnet_trace_fn trace, void* user, clipnet_fit_report** report) {
  return guarded([&] {
    need(model, "model");
    need(data, "data");
    // adam_fit starts from init_params(spec, seed); run it from the model's
    // current parameters by passing them as a warm start.
    auto result = clipnet::adam_fit(data->data, model->spec, to_loss(loss), to_optimizer(cfg),
                                    to_sink(trace, user), {}, {}, &model->theta);
    model->theta = result.final_theta;
    if (report != nullptr) *report = new clipnet_fit_report{std::move(result)};
  });
}

size_t clipnet_fit_report_length(const clipnet_fit_report* report) {
  return report ? report->report.trace.size() : 0;
}

clipnet_status clipnet_fit_report_record(const clipnet_fit_report* report, size_t i,
                                         clipnet_trace_record* out) {
  return guarded([&] {
    need(report, "report");
    need(out, "out");
    if (i >= report->report.trace.size()) {
      clipnet::fail(clipnet::ErrorCode::kInvalidArgument, "trace index out of range");
    }
    *out = to_record(report->report.trace[i]);
  });
}

double clipnet_fit_report_initial_objective(const clipnet_fit_report* report) {
  return report ? report->report.initial_objective : 0.0;
}

int clipnet_fit_report_stalled(const clipnet_fit_report* report) {
  return report && report->report.stalled ? 1 : 0;
}

int clipnet_fit_report_early_stopped(const clipnet_fit_report* report) {
  return report && report->report.early_stopped ? 1 : 0;
}

void clipnet_fit_report_free(clipnet_fit_report* report) { delete report; }

clipnet_status clipnet_knn_create(const clipnet_dataset* data, size_t k, clipnet_knn** out) {
  return guarded([&] {
    need(data, "data");
    need(out, "out");
    *out = new clipnet_knn{clipnet::KnnModel(data->data, k, data->data.task)};
  });
}

clipnet_status clipnet_knn_predict(const clipnet_knn* knn, const double* x, size_t n, double* out) {
  return guarded([&] {
    need(knn, "knn");
    need(x, "x");
    need(out, "out");
    copy_out(knn->model.predict(row_major(x, n, knn->model.dim())), out);
  });
}

void clipnet_knn_free(clipnet_knn* knn) { delete knn; }

double clipnet_lipschitz_bound(double L, double N, double B) {
  return clipnet::theory::lipschitz_bound(L, N, B);
}

clipnet_status clipnet_covering_bound(double L, double N, double B, double S, double delta,
                                      double* value, int* vacuous) {
  return guarded([&] {
    need(value, "value");
    const auto v = clipnet::theory::covering_bound({L, N, B, S, delta, 0.0, 1.0});
    *value = v.value;
    if (vacuous != nullptr) *vacuous = v.vacuous ? 1 : 0;
  });
}

clipnet_status clipnet_covering_bound_clipped(double L, double N, double B, double S, double delta,
                                              double tau, double* value, int* vacuous) {
  return guarded([&] {
    need(value, "value");
    const auto v = clipnet::theory::covering_bound_clipped({L, N, B, S, delta, tau, 1.0});
    *value = v.value;
    if (vacuous != nullptr) *vacuous = v.vacuous ? 1 : 0;
  });
}

clipnet_status clipnet_theory_check(const char* which, uint64_t seed, char** json) {
  return guarded([&] {
    need(which, "which");
    need(json, "json");
    const std::string w = which;
    nlohmann::json out;
    if (w == "lipschitz") {
      clipnet::theory::LipschitzSweep sweep;
      sweep.seed = seed;
      const auto r = clipnet::theory::verify_lipschitz(sweep);
      out = {{"check", "lipschitz"},  {"trials", r.trials}, {"violations", r.violations},
             {"max_ratio", r.max_ratio}, {"pass", r.violations == 0}};
    } else if (w == "covering") {
      out = {{"check", "covering"}, {"rows", covering_table()}};
    } else if (w == "identity") {
      nlohmann::json rows = nlohmann::json::array();
      for (const char* name : {"sigmoid", "tanh", "softplus", "swish", "elu", "softsign", "isru", "isrlu"}) {
        const auto act = clipnet::Activation::parse(name);
        const auto net = clipnet::theory::identity_net(0.0, 1e-2, act);
        rows.push_back({{"activation", name}, {"t", net.t}, {"K", net.K}, {"C1", net.C1},
                        {"sup_error", net.sup_error}, {"pass", net.sup_error <= 1e-2}});
      }
      out = {{"check", "identity"}, {"epsilon", 1e-2}, {"delta", 0.0}, {"rows", rows}};
    } else {
      clipnet::fail(clipnet::ErrorCode::kInvalidArgument,
                    "unknown check '" + w + "' (expected lipschitz, covering or identity)");
    }
    *json = dup_string(out.dump(2));
  });
}

clipnet_status clipnet_run_experiment(const char* config_json, char** summary_json) {
  return guarded([&] {
    need(config_json, "config_json");
    clipnet::ExperimentConfig cfg;
    clipnet::from_json(nlohmann::json::parse(config_json), cfg);
    const auto result = clipnet::run_experiment(cfg);
    if (summary_json != nullptr) *summary_json = dup_string(result.summary.dump(2));
  });
}

clipnet_status clipnet_default_config(char** config_json) {
  return guarded([&] {
    need(config_json, "config_json");
    nlohmann::json j;
    clipnet::to_json(j, clipnet::ExperimentConfig{});
    *config_json = dup_string(j.dump(2));
  });
}

}  // extern "C"
