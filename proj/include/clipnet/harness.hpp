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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "clipnet/dataset.hpp"
#include "clipnet/network.hpp"
#include "clipnet/optimizer.hpp"

namespace clipnet {

enum class ExperimentTask { kRegressionSim, kClassificationToy, kClassificationCsv };
enum class Estimator { kSdnn, kNsdnn, kKnn };

std::string estimator_name(Estimator e);
Estimator parse_estimator(const std::string& name);

// lambda_n anchor log^5(n) / n.
double lambda_anchor(std::size_t n);

struct TuningGrids {
  // lambda = scale * lambda_anchor(n_train) unless `lambdas` is given.
  std::vector<double> lambda_scales{1e-5, 1e-4, 1e-3, 1e-2};
  std::vector<double> lambdas;
  std::vector<double> taus{1e-3, 1e-2, 1e-1};
  std::vector<std::size_t> ks{1, 3, 5, 7, 9, 15, 21, 31};
  // NSDNN: number of Adam steps, selected on validation.
  std::vector<std::size_t> adam_steps{250, 500, 1000, 2000};

  std::vector<double> lambda_values(std::size_t n_train) const;
};

struct ExperimentConfig {
  ExperimentTask task = ExperimentTask::kRegressionSim;
  int function = 1;             // regression-sim: m in 1..6
  std::size_t toy_dim = 5;      // classification-toy: d
  std::string csv_path;         // classification-csv
  std::string label_column = "y";
  std::size_t n_train = 200;
  std::size_t n_test = 100000;  // fresh test points for simulated tasks
  std::size_t n_replicates = 10;
  std::vector<Estimator> estimators{Estimator::kSdnn, Estimator::kNsdnn, Estimator::kKnn};
  TuningGrids grids;
  std::vector<std::size_t> hidden{100, 100, 100, 100, 100};
  Activation activation = Activation::relu();
  OptimizerConfig sdnn;   // CCCP settings (seed is replaced per replicate)
  OptimizerConfig nsdnn;  // Adam settings; outer_iters is ignored (see grids.adam_steps)
  std::uint64_t seed = 1;
  std::string out_dir;    // empty: nothing written
  bool write_traces = false;
  bool record_wall_time = true;

  ExperimentConfig();
  void validate() const;
  bool classification() const { return task != ExperimentTask::kRegressionSim; }
};

void to_json(nlohmann::json& j, const ExperimentConfig& cfg);
// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, ExperimentConfig& cfg);

struct ResultRecord {
  std::size_t replicate = 0;
  Estimator estimator = Estimator::kSdnn;
  std::optional<double> lambda, tau;
  std::optional<std::size_t> k, adam_steps;
  double metric = 0.0;  // empirical L2 error (regression) or accuracy (classification)
  std::optional<double> sparsity;
  double seconds = 0.0;
};

struct ExperimentResult {
  std::vector<ResultRecord> records;
  nlohmann::json summary;
};

// 4:1 split; the validation part has floor(n/5) rows.
std::pair<Dataset, Dataset> split_validation(const Dataset& data, std::uint64_t seed);
// Index form of the same split: (train rows, validation rows).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, std::size_t holdout, std::uint64_t seed);

struct GridScore {
  std::size_t index = 0;
  double score = 0.0;  // lower is better
  bool ok = false;
  std::string error;
};

// Index of the lowest score among successful grid points, first on ties.
std::size_t select_best(const std::vector<GridScore>& scores);

using BatchPredictor = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

struct TunedModel {
  Estimator estimator = Estimator::kSdnn;
  BatchPredictor predict;
  std::optional<double> lambda, tau;
  std::optional<std::size_t> k, adam_steps;
  std::optional<double> sparsity;
  std::vector<GridScore> scores;
  FitReport report;  // SDNN/NSDNN training report of the chosen model
};

// Fits one model per grid point on `train`, scores each on `validation`
// (squared error for regression, misclassification rate for classification)
// and returns the best, trained on `train` only.
TunedModel tune_and_fit(const Dataset& train, const Dataset& validation, Estimator estimator,
                        const ExperimentConfig& cfg, std::uint64_t seed);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// records.csv body (header included).
std::string records_csv(const std::vector<ResultRecord>& records);
nlohmann::json summarize(const std::vector<ResultRecord>& records);

// Median of a nonempty sample (mean of the two middle values for even n).
double median(std::vector<double> v);

}  // namespace clipnet
