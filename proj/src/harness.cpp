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

#include "clipnet/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "clipnet/datagen.hpp"
#include "clipnet/error.hpp"
#include "clipnet/knn.hpp"
#include "clipnet/parallel.hpp"
#include "text_util.hpp"

namespace clipnet {
namespace {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

const char* task_name(ExperimentTask t) {
  switch (t) {
    case ExperimentTask::kRegressionSim: return "regression-sim";
    case ExperimentTask::kClassificationToy: return "classification-toy";
    case ExperimentTask::kClassificationCsv: return "classification-csv";
  }
  return "?";
}

ExperimentTask parse_task(const std::string& s) {
  if (s == "regression-sim") return ExperimentTask::kRegressionSim;
  if (s == "classification-toy") return ExperimentTask::kClassificationToy;
  if (s == "classification-csv") return ExperimentTask::kClassificationCsv;
  fail(ErrorCode::kInvalidArgument, "unknown task '" + s + "'");
}

const char* policy_name(MonotonePolicy p) {
  return p == MonotonePolicy::kStrict ? "strict" : "paper-default";
}

MonotonePolicy parse_policy(const std::string& s) {
  if (s == "strict") return MonotonePolicy::kStrict;
  if (s == "paper-default") return MonotonePolicy::kPaperDefault;
  fail(ErrorCode::kInvalidArgument, "unknown monotone policy '" + s + "'");
}

double sign_label(double f) { return f >= 0.0 ? 1.0 : -1.0; }

// Validation loss: mean squared error, or misclassification rate.
double validation_score(const Eigen::VectorXd& pred, const Dataset& data) {
  const Eigen::Index n = pred.size();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (data.task == Task::kClassification) {
      total += sign_label(pred(i)) == data.targets(i) ? 0.0 : 1.0;
    } else {
      const double r = pred(i) - data.targets(i);
      total += r * r;
    }
  }
  return total / static_cast<double>(n);
}

double accuracy(const Eigen::VectorXd& pred, const Eigen::VectorXd& labels) {
  double hits = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) hits += sign_label(pred(i)) == labels(i) ? 1.0 : 0.0;
  return hits / static_cast<double>(pred.size());
}

MlpSpec network_spec(const ExperimentConfig& cfg, std::size_t input_dim) {
  MlpSpec spec;
  spec.input_dim = input_dim;
  spec.hidden_widths = cfg.hidden;
  spec.activation = cfg.activation;
  return spec;
}

LossKind training_loss(const Dataset& data) {
  return data.task == Task::kClassification ? LossKind::kLogistic : LossKind::kSquare;
}

[[noreturn]] void all_failed(const std::string& est, const std::vector<GridScore>& scores) {
  std::string msg = "every " + est + " grid point failed:";
  for (const auto& s : scores) msg += " [" + std::to_string(s.index) + "] " + s.error + ";";
  fail(ErrorCode::kNumeric, msg);
}

void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out << body;
  if (!out) fail(ErrorCode::kIo, "write to '" + path.string() + "' failed");
}

std::string trace_csv(const FitReport& report) {
  std::ostringstream os;
  os << "iteration,objective,risk,penalty,sparsity,inner_steps,eta\n";
  for (const auto& r : report.trace) {
    os << r.iteration << ',' << detail::format_double(r.objective) << ','
       << detail::format_double(r.risk) << ',' << detail::format_double(r.penalty) << ','
       << detail::format_double(r.sparsity) << ',' << r.inner_steps << ','
       << detail::format_double(r.eta) << '\n';
  }
  return os.str();
}

struct Replicate {
  Dataset train;
  Dataset test;  // classification: labelled test rows; regression-sim: unused
};

}  // namespace

std::string estimator_name(Estimator e) {
  switch (e) {
    case Estimator::kSdnn: return "sdnn";
    case Estimator::kNsdnn: return "nsdnn";
    case Estimator::kKnn: return "knn";
  }
  return "?";
}

Estimator parse_estimator(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "sdnn") return Estimator::kSdnn;
  if (s == "nsdnn") return Estimator::kNsdnn;
  if (s == "knn") return Estimator::kKnn;
  fail(ErrorCode::kInvalidArgument, "unknown estimator '" + name + "'");
}

double lambda_anchor(std::size_t n) {
  require(n >= 2, "lambda anchor needs n >= 2");
  const double ln = std::log(static_cast<double>(n));
  return std::pow(ln, 5) / static_cast<double>(n);
}

std::vector<double> TuningGrids::lambda_values(std::size_t n_train) const {
  if (!lambdas.empty()) return lambdas;
  std::vector<double> out;
  const double anchor = lambda_anchor(n_train);
  for (double s : lambda_scales) out.push_back(s * anchor);
  return out;
}

ExperimentConfig::ExperimentConfig() {
  sdnn.eta = 1e-2;
  sdnn.k_bar = 10;
  sdnn.outer_iters = 500;
  sdnn.early_stop_tol = 1e-8;
  sdnn.early_stop_patience = 20;
  nsdnn.eta = 1e-3;
  nsdnn.outer_iters = 1;
}

void ExperimentConfig::validate() const {
  if (task == ExperimentTask::kRegressionSim) {
    require(function >= 1 && function <= kNumTargets, "function must be in 1..6");
  }
  if (task == ExperimentTask::kClassificationToy) require(toy_dim >= 2, "toy_dim must be >= 2");
  if (task == ExperimentTask::kClassificationCsv) require(!csv_path.empty(), "csv path is required");
  if (task != ExperimentTask::kClassificationCsv) require(n_train >= 10, "n_train must be >= 10");
  require(n_test >= 1, "n_test must be positive");
  require(n_replicates >= 1, "replicates must be positive");
  require(!estimators.empty(), "at least one estimator is required");
  require(!hidden.empty(), "architecture needs at least one hidden layer");
  for (Estimator e : estimators) {
    if (e == Estimator::kSdnn) {
      require(!grids.taus.empty() && (!grids.lambdas.empty() || !grids.lambda_scales.empty()),
              "sdnn needs nonempty lambda and tau grids");
    } else if (e == Estimator::kNsdnn) {
      require(!grids.adam_steps.empty(), "nsdnn needs a nonempty adam_steps grid");
    } else {
      require(!grids.ks.empty(), "knn needs a nonempty k grid");
    }
  }
  sdnn.validate();
  nsdnn.validate();
}

void to_json(nlohmann::json& j, const ExperimentConfig& cfg) {
  std::vector<std::string> est;
  for (Estimator e : cfg.estimators) est.push_back(estimator_name(e));
  j = nlohmann::json{
      {"task", task_name(cfg.task)},
      {"function", cfg.function},
      {"toy_dim", cfg.toy_dim},
      {"csv", cfg.csv_path},
      {"label", cfg.label_column},
      {"n_train", cfg.n_train},
      {"n_test", cfg.n_test},
      {"replicates", cfg.n_replicates},
      {"estimators", est},
      {"grids",
       {{"lambda_scales", cfg.grids.lambda_scales},
        {"lambdas", cfg.grids.lambdas},
        {"taus", cfg.grids.taus},
        {"ks", cfg.grids.ks},
        {"adam_steps", cfg.grids.adam_steps}}},
      {"architecture", {{"hidden", cfg.hidden}, {"activation", cfg.activation.name()}}},
      {"sdnn",
       {{"eta", cfg.sdnn.eta},
        {"k_bar", cfg.sdnn.k_bar},
        {"outer_iters", cfg.sdnn.outer_iters},
        {"batch_size", cfg.sdnn.batch_size ? nlohmann::json(*cfg.sdnn.batch_size) : nlohmann::json()},
        {"policy", policy_name(cfg.sdnn.monotone_policy)},
        {"early_stop_tol", cfg.sdnn.early_stop_tol},
        {"early_stop_patience", cfg.sdnn.early_stop_patience}}},
      {"nsdnn",
       {{"eta", cfg.nsdnn.eta},
        {"batch_size", cfg.nsdnn.batch_size ? nlohmann::json(*cfg.nsdnn.batch_size) : nlohmann::json()}}},
      {"seed", cfg.seed},
      {"out", cfg.out_dir},
      {"write_traces", cfg.write_traces},
      {"record_wall_time", cfg.record_wall_time},
  };
  if (cfg.activation.param() != 0.0) {
    j["architecture"]["activation"] = cfg.activation.name() + ":" + detail::format_double(cfg.activation.param());
  }
}

void from_json(const nlohmann::json& j, ExperimentConfig& cfg) {
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key) && !j.at(key).is_null()) j.at(key).get_to(field);
  };
  if (j.contains("task")) cfg.task = parse_task(j.at("task").get<std::string>());
  if (j.contains("function")) {
    const auto& f = j.at("function");
    if (f.is_string()) {
      std::string s = f.get<std::string>();
      if (!s.empty() && (s[0] == 'f' || s[0] == 'F')) s.erase(0, 1);
      try {
        cfg.function = std::stoi(s);
      } catch (const std::exception&) {
        fail(ErrorCode::kInvalidArgument, "bad function id '" + f.get<std::string>() + "'");
      }
    } else {
      cfg.function = f.get<int>();
    }
  }
  get("toy_dim", cfg.toy_dim);
  get("csv", cfg.csv_path);
  get("label", cfg.label_column);
  get("n_train", cfg.n_train);
  get("n_test", cfg.n_test);
  get("replicates", cfg.n_replicates);
  if (j.contains("estimators")) {
    cfg.estimators.clear();
    const auto& e = j.at("estimators");
    std::vector<std::string> names;
    if (e.is_string()) {
      std::stringstream ss(e.get<std::string>());
      for (std::string tok; std::getline(ss, tok, ',');) {
        if (!tok.empty()) names.push_back(detail::trim(tok));
      }
    } else {
      names = e.get<std::vector<std::string>>();
    }
    for (const auto& n : names) cfg.estimators.push_back(parse_estimator(n));
  }
  if (j.contains("grids")) {
    const auto& g = j.at("grids");
    auto gget = [&g](const char* key, auto& field) {
      if (g.contains(key) && !g.at(key).is_null()) g.at(key).get_to(field);
    };
    gget("lambda_scales", cfg.grids.lambda_scales);
    gget("lambdas", cfg.grids.lambdas);
    gget("taus", cfg.grids.taus);
    gget("ks", cfg.grids.ks);
    gget("adam_steps", cfg.grids.adam_steps);
  }
  if (j.contains("architecture")) {
    const auto& a = j.at("architecture");
    if (a.contains("hidden")) a.at("hidden").get_to(cfg.hidden);
    if (a.contains("activation")) cfg.activation = Activation::parse(a.at("activation").get<std::string>());
  }
  auto read_opt = [](const nlohmann::json& o, OptimizerConfig& opt) {
    if (o.contains("eta")) o.at("eta").get_to(opt.eta);
    if (o.contains("k_bar")) o.at("k_bar").get_to(opt.k_bar);
    if (o.contains("outer_iters")) o.at("outer_iters").get_to(opt.outer_iters);
    if (o.contains("batch_size")) {
      if (o.at("batch_size").is_null()) {
        opt.batch_size.reset();
      } else {
        opt.batch_size = o.at("batch_size").get<std::size_t>();
      }
    }
    if (o.contains("policy")) opt.monotone_policy = parse_policy(o.at("policy").get<std::string>());
    if (o.contains("early_stop_tol")) o.at("early_stop_tol").get_to(opt.early_stop_tol);
    if (o.contains("early_stop_patience")) o.at("early_stop_patience").get_to(opt.early_stop_patience);
  };
  if (j.contains("sdnn")) read_opt(j.at("sdnn"), cfg.sdnn);
  if (j.contains("nsdnn")) read_opt(j.at("nsdnn"), cfg.nsdnn);
  get("seed", cfg.seed);
  get("out", cfg.out_dir);
  get("write_traces", cfg.write_traces);
  get("record_wall_time", cfg.record_wall_time);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n,
                                                                            std::size_t holdout,
                                                                            std::uint64_t seed) {
  require(holdout >= 1 && holdout < n, "holdout size must lie in [1, n)");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> held(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(holdout));
  std::vector<std::size_t> kept(perm.begin() + static_cast<std::ptrdiff_t>(holdout), perm.end());
  std::sort(held.begin(), held.end());
  std::sort(kept.begin(), kept.end());
  return {std::move(kept), std::move(held)};
}

std::pair<Dataset, Dataset> split_validation(const Dataset& data, std::uint64_t seed) {
  if (data.size() < 10) {
    fail(ErrorCode::kInvalidArgument,
         "validation split needs at least 10 rows, got " + std::to_string(data.size()));
  }
  auto [train, val] = split_indices(data.size(), data.size() / 5, seed);
  return {data.subset(train), data.subset(val)};
}

std::size_t select_best(const std::vector<GridScore>& scores) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!scores[i].ok) continue;
    if (!best || scores[i].score < scores[*best].score) best = i;
  }
  if (!best) fail(ErrorCode::kNumeric, "no grid point succeeded");
  return *best;
}

TunedModel tune_and_fit(const Dataset& train, const Dataset& validation, Estimator estimator,
                        const ExperimentConfig& cfg, std::uint64_t seed) {
  require(!train.empty() && !validation.empty(), "tuning needs train and validation rows");
  TunedModel best;
  best.estimator = estimator;
  const Task task = train.task;

  if (estimator == Estimator::kKnn) {
    std::vector<std::size_t> ks;
    for (std::size_t k : cfg.grids.ks) {
      if (k >= 1 && k <= train.size()) ks.push_back(k);
    }
    require(!ks.empty(), "no k in the grid fits the training size");
    for (std::size_t i = 0; i < ks.size(); ++i) {
      GridScore s;
      s.index = i;
      try {
        s.score = validation_score(knn_fit(train, ks[i], task).predict(validation.inputs), validation);
        s.ok = std::isfinite(s.score);
      } catch (const std::exception& e) {
        s.error = e.what();
      }
      best.scores.push_back(s);
    }
    if (std::none_of(best.scores.begin(), best.scores.end(), [](auto& s) { return s.ok; })) {
      all_failed("knn", best.scores);
    }
    const std::size_t pick = select_best(best.scores);
    best.k = ks[pick];
    auto model = std::make_shared<KnnModel>(train, ks[pick], task);
    best.predict = [model](const Eigen::MatrixXd& x) { return model->predict(x); };
    return best;
  }

  const auto spec = std::make_shared<MlpSpec>(network_spec(cfg, train.dim()));
  const LossKind loss = training_loss(train);

  if (estimator == Estimator::kNsdnn) {
    std::vector<std::size_t> steps = cfg.grids.adam_steps;
    OptimizerConfig opt = cfg.nsdnn;
    opt.seed = seed;
    opt.outer_iters = *std::max_element(steps.begin(), steps.end());
    require(opt.outer_iters >= 1, "adam_steps must be positive");
    // Adam is deterministic, so the iterate after s steps of one long run is
    // the model a separate s-step run would produce.
    std::map<std::size_t, Eigen::VectorXd> snapshots;
    for (std::size_t s : steps) snapshots[s];
    FitReport report;
    std::string failure;
    try {
      report = adam_fit(train, *spec, loss, opt, {}, [&](std::size_t step, const Eigen::VectorXd& theta) {
        if (auto it = snapshots.find(step + 1); it != snapshots.end()) it->second = theta;
      });
    } catch (const std::exception& e) {
      failure = e.what();
    }
    for (std::size_t i = 0; i < steps.size(); ++i) {
      GridScore s;
      s.index = i;
      const Eigen::VectorXd& theta = snapshots[steps[i]];
      if (theta.size() == 0) {
        s.error = failure.empty() ? "no snapshot" : failure;
      } else {
        s.score = validation_score(predict(*spec, as_span(theta), validation.inputs), validation);
        s.ok = std::isfinite(s.score);
        if (!s.ok) s.error = "non-finite validation score";
      }
      best.scores.push_back(s);
    }
    if (std::none_of(best.scores.begin(), best.scores.end(), [](auto& s) { return s.ok; })) {
      all_failed("nsdnn", best.scores);
    }
    const std::size_t pick = select_best(best.scores);
    best.adam_steps = steps[pick];
    auto theta = std::make_shared<Eigen::VectorXd>(snapshots[steps[pick]]);
    best.sparsity = sparsity(as_span(*theta));
    report.trace.resize(std::min(report.trace.size(), steps[pick]));
    best.report = std::move(report);
    best.predict = [spec, theta](const Eigen::MatrixXd& x) { return predict(*spec, as_span(*theta), x); };
    return best;
  }

  // SDNN: lambda-major, tau-minor grid.
  const std::vector<double> lambdas = cfg.grids.lambda_values(cfg.task == ExperimentTask::kClassificationCsv
                                                                  ? train.size() + validation.size()
                                                                  : cfg.n_train);
  std::vector<std::pair<double, double>> grid;
  for (double l : lambdas) {
    for (double t : cfg.grids.taus) grid.emplace_back(l, t);
  }
  OptimizerConfig opt = cfg.sdnn;
  opt.seed = seed;
  std::vector<FitReport> reports(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    GridScore s;
      s.index = i;
    try {
      reports[i] = fit(train, *spec, loss, PenaltyConfig{grid[i].first, grid[i].second}, opt);
      s.score = validation_score(predict(*spec, as_span(reports[i].final_theta), validation.inputs),
                                 validation);
      s.ok = std::isfinite(s.score);
      if (!s.ok) s.error = "non-finite validation score";
    } catch (const std::exception& e) {
      s.error = e.what();
    }
    best.scores.push_back(s);
  }
  if (std::none_of(best.scores.begin(), best.scores.end(), [](auto& s) { return s.ok; })) {
    all_failed("sdnn", best.scores);
  }
  const std::size_t pick = select_best(best.scores);
  best.lambda = grid[pick].first;
  best.tau = grid[pick].second;
  auto theta = std::make_shared<Eigen::VectorXd>(reports[pick].final_theta);
  best.sparsity = sparsity(as_span(*theta));
  best.report = std::move(reports[pick]);
  best.predict = [spec, theta](const Eigen::MatrixXd& x) { return predict(*spec, as_span(*theta), x); };
  return best;
}

double median(std::vector<double> v) {
  require(!v.empty(), "median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string records_csv(const std::vector<ResultRecord>& records) {
  std::ostringstream os;
  os << "replicate,estimator,lambda,tau,k,metric,sparsity,seconds\n";
  auto opt = [](const std::optional<double>& v) { return v ? detail::format_double(*v) : std::string(); };
  for (const auto& r : records) {
    os << r.replicate << ',' << estimator_name(r.estimator) << ',' << opt(r.lambda) << ','
       << opt(r.tau) << ',' << (r.k ? std::to_string(*r.k) : std::string()) << ','
       << detail::format_double(r.metric) << ',' << opt(r.sparsity) << ','
       << detail::format_double(r.seconds) << '\n';
  }
  return os.str();
}

nlohmann::json summarize(const std::vector<ResultRecord>& records) {
  std::map<std::string, std::vector<const ResultRecord*>> by_est;
  std::vector<std::string> order;
  for (const auto& r : records) {
    const std::string name = estimator_name(r.estimator);
    if (!by_est.count(name)) order.push_back(name);
    by_est[name].push_back(&r);
  }
  auto stats = [](const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    return nlohmann::json{{"mean", mean}, {"sd", sd}, {"median", median(v)}};
  };
  nlohmann::json out = nlohmann::json::object();
  for (const auto& name : order) {
    std::vector<double> metric, sparse;
    for (const auto* r : by_est[name]) {
      metric.push_back(r->metric);
      if (r->sparsity) sparse.push_back(*r->sparsity);
    }
    nlohmann::json e;
    e["n"] = metric.size();
    e["metric"] = stats(metric);
    if (!sparse.empty()) e["sparsity"] = stats(sparse);
    out[name] = e;
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();

  Dataset csv_data;
  if (cfg.task == ExperimentTask::kClassificationCsv) {
    csv_data = ingest_csv(cfg.csv_path, cfg.label_column, Task::kClassification);
    require(csv_data.size() >= 15, "CSV needs enough rows for a 7:3 split with validation");
  }

  // Datasets per replicate, generated up front so tasks only read them.
  std::vector<Replicate> reps(cfg.n_replicates);
  for (std::size_t r = 0; r < cfg.n_replicates; ++r) {
    const std::uint64_t s = derive_seed(cfg.seed, r, 0);
    switch (cfg.task) {
      case ExperimentTask::kRegressionSim:
        reps[r].train = gen_regression(cfg.function, cfg.n_train, s);
        break;
      case ExperimentTask::kClassificationToy:
        reps[r].train = gen_classification_toy(cfg.toy_dim, cfg.n_train, s);
        reps[r].test = gen_classification_toy(cfg.toy_dim, cfg.n_test, derive_seed(cfg.seed, r, 1));
        break;
      case ExperimentTask::kClassificationCsv: {
        // 7:3 train/test split of the whole file
        auto [train, test] = split_indices(csv_data.size(), csv_data.size() * 3 / 10, s);
        reps[r].train = csv_data.subset(train);
        reps[r].test = csv_data.subset(test);
        break;
      }
    }
  }

  const std::size_t n_est = cfg.estimators.size();
  std::vector<ResultRecord> records(cfg.n_replicates * n_est);
  std::vector<FitReport> traces(records.size());
  parallel_for(records.size(), [&](std::size_t task) {
    const std::size_t r = task / n_est;
    const Estimator est = cfg.estimators[task % n_est];
    const auto start = std::chrono::steady_clock::now();

    auto [train, val] = split_validation(reps[r].train, derive_seed(cfg.seed, r, 2));
    TunedModel model;
    try {
      model = tune_and_fit(train, val, est, cfg, derive_seed(cfg.seed, r, 3));
    } catch (const Error& e) {
      throw Error(e.code(), "replicate " + std::to_string(r) + ", " + estimator_name(est) + ": " + e.what());
    }

    ResultRecord rec;
    rec.replicate = r;
    rec.estimator = est;
    rec.lambda = model.lambda;
    rec.tau = model.tau;
    rec.k = model.k;
    rec.adam_steps = model.adam_steps;
    if (est == Estimator::kSdnn) rec.sparsity = model.sparsity;
    if (cfg.task == ExperimentTask::kRegressionSim) {
      rec.metric = empirical_l2_error(model.predict, cfg.function, cfg.n_test, derive_seed(cfg.seed, r, 1));
    } else {
      rec.metric = accuracy(model.predict(reps[r].test.inputs), reps[r].test.targets);
    }
    if (!std::isfinite(rec.metric)) {
      fail(ErrorCode::kNumeric, "replicate " + std::to_string(r) + ", " + estimator_name(est) +
                                    ": non-finite test metric");
    }
    if (cfg.record_wall_time) {
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    records[task] = rec;
    traces[task] = std::move(model.report);
  });

  ExperimentResult result;
  result.records = records;
  nlohmann::json chosen = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json c{{"replicate", r.replicate}, {"estimator", estimator_name(r.estimator)}};
    if (r.lambda) c["lambda"] = *r.lambda;
    if (r.tau) c["tau"] = *r.tau;
    if (r.k) c["k"] = *r.k;
    if (r.adam_steps) c["adam_steps"] = *r.adam_steps;
    chosen.push_back(c);
  }
  nlohmann::json config_echo;
  to_json(config_echo, cfg);
  result.summary = {{"config", config_echo},
                    {"metric", cfg.classification() ? "accuracy" : "empirical_l2"},
                    {"estimators", summarize(records)},
                    {"chosen", chosen}};

  if (!cfg.out_dir.empty()) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) fail(ErrorCode::kIo, "cannot create '" + cfg.out_dir + "': " + ec.message());
    const fs::path dir(cfg.out_dir);
    write_text(dir / "records.csv", records_csv(records));
    write_text(dir / "summary.json", result.summary.dump(2) + "\n");
    if (cfg.write_traces) {
      for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].estimator == Estimator::kKnn) continue;
        write_text(dir / ("trace_" + std::to_string(records[i].replicate) + "_" +
                          estimator_name(records[i].estimator) + ".csv"),
                   trace_csv(traces[i]));
      }
    }
  }
  return result;
}

}  // namespace clipnet
