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

// clipnet command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clipnet/clipnet.h"

using nlohmann::json;

namespace {

struct Failure {
  int code;
};

void check(clipnet_status s) {
  if (s != CLIPNET_OK) {
    std::cerr << "clipnet: " << clipnet_last_error() << "\n";
    throw Failure{static_cast<int>(s)};
  }
}

std::string take(char* s) {
  std::string out(s);
  clipnet_string_free(s);
  return out;
}

json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "clipnet: cannot open config '" << path << "'\n";
    throw Failure{CLIPNET_ERR_IO};
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    std::cerr << "clipnet: config '" << path << "': " << e.what() << "\n";
    throw Failure{CLIPNET_ERR_INVALID_ARGUMENT};
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

// Options shared by simulate and classify. Unset options leave the config alone.
struct RunOptions {
  std::string config;
  std::optional<std::size_t> replicates, n_test;
  std::optional<std::string> estimators, out, activation, policy;
  std::optional<std::uint64_t> seed;
  std::vector<std::size_t> hidden, ks, adam_steps;
  std::vector<double> lambdas, lambda_scales, taus;
  std::optional<double> eta, adam_eta, early_stop_tol;
  std::optional<std::size_t> k_bar, outer_iters, batch, patience;
  bool traces = false;
  bool no_wall_time = false;

  void add(CLI::App* app) {
    app->add_option("--config", config, "JSON config file (flags override it)");
    app->add_option("--replicates", replicates, "number of replicates");
    app->add_option("--estimators", estimators, "comma list of sdnn,nsdnn,knn");
    app->add_option("--out", out, "output directory for records.csv and summary.json");
    app->add_option("--seed", seed, "base seed");
    app->add_option("--hidden", hidden, "hidden layer widths")->delimiter(',');
    app->add_option("--activation", activation, "activation, e.g. relu or leaky_relu:0.1");
    app->add_option("--lambdas", lambdas, "explicit lambda grid")->delimiter(',');
    app->add_option("--lambda-scales", lambda_scales, "lambda grid as multiples of log^5(n)/n")
        ->delimiter(',');
    app->add_option("--taus", taus, "tau grid")->delimiter(',');
    app->add_option("--ks", ks, "kNN k grid")->delimiter(',');
    app->add_option("--adam-steps", adam_steps, "NSDNN step-count grid")->delimiter(',');
    app->add_option("--eta", eta, "SDNN step size");
    app->add_option("--k-bar", k_bar, "SDNN inner iteration cap");
    app->add_option("--outer-iters", outer_iters, "SDNN outer iterations");
    app->add_option("--batch", batch, "SDNN mini-batch size (0: full batch)");
    app->add_option("--policy", policy, "strict or paper-default")
        ->check(CLI::IsMember({"strict", "paper-default"}));
    app->add_option("--early-stop-tol", early_stop_tol, "relative Q decrease threshold (0: off)");
    app->add_option("--patience", patience, "iterations below the threshold before stopping");
    app->add_option("--adam-eta", adam_eta, "NSDNN learning rate");
    app->add_flag("--traces", traces, "write trace_<rep>_<est>.csv files");
    app->add_flag("--no-wall-time", no_wall_time, "record 0 seconds for byte-stable output");
  }

  void apply(json& cfg) const {
    if (replicates) cfg["replicates"] = *replicates;
    if (n_test) cfg["n_test"] = *n_test;
    if (estimators) cfg["estimators"] = split_list(*estimators);
    if (out) cfg["out"] = *out;
    if (seed) cfg["seed"] = *seed;
    if (!hidden.empty()) cfg["architecture"]["hidden"] = hidden;
    if (activation) cfg["architecture"]["activation"] = *activation;
    if (!lambdas.empty()) cfg["grids"]["lambdas"] = lambdas;
    if (!lambda_scales.empty()) {
      cfg["grids"]["lambda_scales"] = lambda_scales;
      cfg["grids"]["lambdas"] = json::array();
    }
    if (!taus.empty()) cfg["grids"]["taus"] = taus;
    if (!ks.empty()) cfg["grids"]["ks"] = ks;
    if (!adam_steps.empty()) cfg["grids"]["adam_steps"] = adam_steps;
    if (eta) cfg["sdnn"]["eta"] = *eta;
    if (k_bar) cfg["sdnn"]["k_bar"] = *k_bar;
    if (outer_iters) cfg["sdnn"]["outer_iters"] = *outer_iters;
    if (batch) cfg["sdnn"]["batch_size"] = *batch == 0 ? json() : json(*batch);
    if (policy) cfg["sdnn"]["policy"] = *policy;
    if (early_stop_tol) cfg["sdnn"]["early_stop_tol"] = *early_stop_tol;
    if (patience) cfg["sdnn"]["early_stop_patience"] = *patience;
    if (adam_eta) cfg["nsdnn"]["eta"] = *adam_eta;
    if (traces) cfg["write_traces"] = true;
    if (no_wall_time) cfg["record_wall_time"] = false;
  }

  json base() const {
    json cfg = json::parse(take([] {
      char* s = nullptr;
      check(clipnet_default_config(&s));
      return s;
    }()));
    if (!config.empty()) cfg.merge_patch(load_file(config));
    return cfg;
  }
};

void run(const json& cfg) {
  char* summary = nullptr;
  check(clipnet_run_experiment(cfg.dump().c_str(), &summary));
  std::cout << take(summary) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clipnet: sparse deep networks with the clipped L1 penalty"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(clipnet_version()));

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulated regression or toy classification study");
  RunOptions sim_opts;
  sim_opts.add(sim);
  std::optional<std::string> function;
  std::optional<std::size_t> sim_n, toy_dim;
  sim->add_option("--function", function, "target f1..f6");
  sim->add_option("--n", sim_n, "training sample size");
  sim->add_option("--n-test", sim_opts.n_test, "fresh test points per replicate");
  sim->add_option("--toy", toy_dim, "run the logistic toy classification with this dimension");

  // classify
  auto* cls = app.add_subcommand("classify", "classification on a CSV file (7:3 train/test resplits)");
  RunOptions cls_opts;
  cls_opts.add(cls);
  std::string csv, label = "y";
  cls->add_option("--csv", csv, "input CSV with a header row")->required();
  cls->add_option("--label", label, "label column name");

  // theory
  auto* theory = app.add_subcommand("theory", "numerical checks of the theoretical constructions");
  std::string which;
  std::uint64_t theory_seed = 0;
  theory->add_option("--check", which, "lipschitz, covering or identity")
      ->required()
      ->check(CLI::IsMember({"lipschitz", "covering", "identity"}));
  theory->add_option("--seed", theory_seed, "seed for randomised checks");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "calibration constant c_m and noise share");
  std::string cal_function;
  std::size_t cal_samples = 1000000;
  std::uint64_t cal_seed = 1;
  cal->add_option("--function", cal_function, "target f1..f6")->required();
  cal->add_option("--samples", cal_samples, "samples for the noise-share check");
  cal->add_option("--seed", cal_seed, "seed for the noise-share check");

  // generate
  auto* gen = app.add_subcommand("generate", "write one simulated dataset to CSV");
  std::string gen_function, gen_out;
  std::size_t gen_n = 200, gen_toy = 0;
  std::uint64_t gen_seed = 1;
  gen->add_option("--function", gen_function, "target f1..f6");
  gen->add_option("--toy", gen_toy, "toy classification dimension instead of a regression target");
  gen->add_option("--n", gen_n, "number of rows");
  gen->add_option("--seed", gen_seed, "seed");
  gen->add_option("--out", gen_out, "CSV path (a .meta.json sidecar is written next to it)")->required();

  CLI11_PARSE(app, argc, argv);

  auto parse_function = [](const std::string& f) {
    std::string s = f;
    if (!s.empty() && (s[0] == 'f' || s[0] == 'F')) s.erase(0, 1);
    try {
      return std::stoi(s);
    } catch (const std::exception&) {
      std::cerr << "clipnet: bad function id '" << f << "'\n";
      throw Failure{CLIPNET_ERR_INVALID_ARGUMENT};
    }
  };

  try {
    if (sim->parsed()) {
      json cfg = sim_opts.base();
      if (toy_dim) {
        cfg["task"] = "classification-toy";
        cfg["toy_dim"] = *toy_dim;
      } else if (function || !cfg.contains("task") || cfg["task"] != "classification-toy") {
        cfg["task"] = "regression-sim";
      }
      if (function) cfg["function"] = parse_function(*function);
      if (sim_n) cfg["n_train"] = *sim_n;
      sim_opts.apply(cfg);
      run(cfg);
    } else if (cls->parsed()) {
      json cfg = cls_opts.base();
      cfg["task"] = "classification-csv";
      cfg["csv"] = csv;
      cfg["label"] = label;
      cls_opts.apply(cfg);
      run(cfg);
    } else if (theory->parsed()) {
      char* out = nullptr;
      check(clipnet_theory_check(which.c_str(), theory_seed, &out));
      std::cout << take(out) << "\n";
    } else if (cal->parsed()) {
      const int m = parse_function(cal_function);
      double c = 0.0, share = 0.0;
      check(clipnet_calibrate(m, 0, 0, &c));
      check(clipnet_noise_share(m, cal_samples, cal_seed, &share));
      json out{{"function", "f" + std::to_string(m)},
               {"c_m", c},
               {"noise_share", share},
               {"samples", cal_samples},
               {"seed", cal_seed}};
      std::cout << out.dump(2) << "\n";
    } else if (gen->parsed()) {
      clipnet_dataset* data = nullptr;
      if (gen_toy > 0) {
        check(clipnet_dataset_toy(gen_toy, gen_n, gen_seed, &data));
      } else {
        check(clipnet_dataset_regression(parse_function(gen_function.empty() ? "f1" : gen_function),
                                         gen_n, gen_seed, &data));
      }
      std::string meta = gen_out;
      if (meta.size() > 4 && meta.substr(meta.size() - 4) == ".csv") meta.resize(meta.size() - 4);
      meta += ".meta.json";
      const clipnet_status s = clipnet_dataset_write(data, gen_out.c_str(), meta.c_str());
      clipnet_dataset_free(data);
      check(s);
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return 0;
}
