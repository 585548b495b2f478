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

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "clipnet/datagen.hpp"
#include "clipnet/error.hpp"
#include "clipnet/harness.hpp"
#include "clipnet/parallel.hpp"
#include "test_support.hpp"

using namespace clipnet;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.n_train = 50;
  cfg.n_test = 2000;
  cfg.n_replicates = 3;
  cfg.hidden = {6, 6};
  cfg.grids.lambda_scales = {1e-3};
  cfg.grids.taus = {1e-2, 1e-1};
  cfg.grids.ks = {1, 5};
  cfg.grids.adam_steps = {10, 30};
  cfg.sdnn.outer_iters = 30;
  cfg.record_wall_time = false;
  return cfg;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(LambdaAnchor, Value) {
  EXPECT_NEAR(lambda_anchor(200), std::pow(std::log(200.0), 5) / 200.0, 1e-12);
  EXPECT_NEAR(lambda_anchor(200), 20.87, 0.01);
  const auto l = TuningGrids{}.lambda_values(200);
  ASSERT_EQ(l.size(), 4u);
  EXPECT_NEAR(l[2], 1e-3 * lambda_anchor(200), 1e-15);
  TuningGrids explicit_grid;
  explicit_grid.lambdas = {0.5};
  EXPECT_EQ(explicit_grid.lambda_values(200), std::vector<double>{0.5});
}

TEST(Split, SizesDisjointReproducible) {
  const auto [kept, held] = split_indices(100, 20, 4);
  EXPECT_EQ(kept.size(), 80u);
  EXPECT_EQ(held.size(), 20u);
  std::set<std::size_t> all(kept.begin(), kept.end());
  all.insert(held.begin(), held.end());
  EXPECT_EQ(all.size(), 100u);
  EXPECT_EQ(split_indices(100, 20, 4), split_indices(100, 20, 4));
  EXPECT_NE(split_indices(100, 20, 4), split_indices(100, 20, 5));

  const auto d = test::random_regression(53, 2, 1);
  const auto [tr, va] = split_validation(d, 9);
  EXPECT_EQ(tr.size(), 43u);
  EXPECT_EQ(va.size(), 10u);
}

TEST(SelectBest, Rules) {
  auto score = [](std::size_t i, double s, bool ok) {
    GridScore g;
    g.index = i;
    g.score = s;
    g.ok = ok;
    return g;
  };
  EXPECT_EQ(select_best({score(0, 2.0, true), score(1, 1.0, true), score(2, 1.0, true)}), 1u);
  EXPECT_EQ(select_best({score(0, 0.1, false), score(1, 1.0, true)}), 1u);
  std::vector<GridScore> s = {score(0, 3.0, true), score(1, 0.5, true)};
  const auto before = select_best(s);
  s.push_back(score(2, 0.7, true));
  EXPECT_EQ(select_best(s), before);
  EXPECT_THROW(select_best({score(0, 1.0, false)}), Error);
  EXPECT_THROW(select_best({}), Error);
}

TEST(Median, Examples) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_THROW(median({}), Error);
}

TEST(TuneAndFit, SinglePointGrid) {
  auto cfg = small_config();
  cfg.grids.taus = {1e-2};
  const auto data = gen_regression(1, 60, 3);
  const auto [tr, va] = split_validation(data, 1);
  const auto sdnn = tune_and_fit(tr, va, Estimator::kSdnn, cfg, 2);
  EXPECT_EQ(sdnn.scores.size(), 1u);
  EXPECT_EQ(*sdnn.tau, 1e-2);
  ASSERT_TRUE(sdnn.sparsity.has_value());
  EXPECT_GE(*sdnn.sparsity, 0.0);
  EXPECT_LE(*sdnn.sparsity, 1.0);
  EXPECT_EQ(sdnn.predict(va.inputs).size(), static_cast<Eigen::Index>(va.size()));

  const auto knn = tune_and_fit(tr, va, Estimator::kKnn, cfg, 2);
  EXPECT_EQ(knn.scores.size(), 2u);
  ASSERT_TRUE(knn.k.has_value());
  // the score of the chosen k is the validation mean squared error
  const Eigen::VectorXd r = knn.predict(va.inputs) - va.targets;
  const auto& chosen = knn.scores[*knn.k == 1 ? 0 : 1];
  EXPECT_NEAR(chosen.score, r.squaredNorm() / va.size(), 1e-12);
}

TEST(TuneAndFit, NsdnnCheckpointsMatchFreshRuns) {
  auto cfg = small_config();
  const auto data = gen_regression(2, 60, 3);
  const auto [tr, va] = split_validation(data, 1);
  const auto tuned = tune_and_fit(tr, va, Estimator::kNsdnn, cfg, 8);
  ASSERT_EQ(tuned.scores.size(), 2u);
  ASSERT_TRUE(tuned.adam_steps.has_value());
  for (std::size_t i = 0; i < 2; ++i) {
    auto single = cfg;
    single.grids.adam_steps = {cfg.grids.adam_steps[i]};
    const auto fresh = tune_and_fit(tr, va, Estimator::kNsdnn, single, 8);
    EXPECT_EQ(fresh.scores[0].score, tuned.scores[i].score);
  }
}

TEST(RunExperiment, RecordCountAndDeterminism) {
  const auto cfg = small_config();
  const auto a = run_experiment(cfg);
  EXPECT_EQ(a.records.size(), cfg.n_replicates * cfg.estimators.size());
  const auto b = run_experiment(cfg);
  EXPECT_EQ(records_csv(a.records), records_csv(b.records));
  EXPECT_EQ(a.summary.dump(), b.summary.dump());

  const auto rows = parse_csv(records_csv(a.records));
  EXPECT_EQ(rows[0], (std::vector<std::string>{"replicate", "estimator", "lambda", "tau", "k",
                                               "metric", "sparsity", "seconds"}));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 8u) << i;
    EXPECT_EQ(rows[i][7], "0");
    if (rows[i][1] == "sdnn") {
      EXPECT_FALSE(rows[i][2].empty());
      EXPECT_FALSE(rows[i][6].empty());
    } else {
      EXPECT_TRUE(rows[i][2].empty());
      EXPECT_TRUE(rows[i][6].empty());
    }
    if (rows[i][1] == "knn") EXPECT_FALSE(rows[i][4].empty());
  }
}

TEST(RunExperiment, ThreadCountDoesNotChangeOutput) {
  const auto cfg = small_config();
  setenv("CLIPNET_THREADS", "1", 1);
  EXPECT_EQ(worker_count(), 1u);
  const auto one = records_csv(run_experiment(cfg).records);
  setenv("CLIPNET_THREADS", "3", 1);
  EXPECT_LE(worker_count(), 3u);
  const auto three = records_csv(run_experiment(cfg).records);
  unsetenv("CLIPNET_THREADS");
  EXPECT_EQ(one, three);
}

TEST(RunExperiment, SummaryMatchesRecords) {
  const auto res = run_experiment(small_config());
  for (const auto& name : {"sdnn", "nsdnn", "knn"}) {
    std::vector<double> m;
    for (const auto& r : res.records)
      if (estimator_name(r.estimator) == name) m.push_back(r.metric);
    double mean = 0;
    for (double v : m) mean += v;
    mean /= m.size();
    double ss = 0;
    for (double v : m) ss += (v - mean) * (v - mean);
    const auto& s = res.summary.at("estimators").at(name);
    EXPECT_EQ(s.at("n").get<std::size_t>(), m.size());
    EXPECT_NEAR(s.at("metric").at("mean").get<double>(), mean, 1e-12 * std::abs(mean));
    EXPECT_NEAR(s.at("metric").at("sd").get<double>(), std::sqrt(ss / (m.size() - 1)), 1e-10);
  }
  EXPECT_TRUE(res.summary.at("estimators").at("sdnn").contains("sparsity"));
  EXPECT_FALSE(res.summary.at("estimators").at("knn").contains("sparsity"));
}

TEST(RunExperiment, SingleKnnReplicate) {
  auto cfg = small_config();
  cfg.n_replicates = 1;
  cfg.estimators = {Estimator::kKnn};
  const auto res = run_experiment(cfg);
  ASSERT_EQ(res.records.size(), 1u);
  EXPECT_EQ(res.records[0].estimator, Estimator::kKnn);
  EXPECT_GT(res.records[0].metric, 0.0);
}

TEST(RunExperiment, WritesOutputs) {
  auto cfg = small_config();
  cfg.n_replicates = 1;
  cfg.estimators = {Estimator::kSdnn, Estimator::kKnn};
  cfg.write_traces = true;
  const auto dir = std::filesystem::temp_directory_path() / "clipnet_test_run";
  std::filesystem::remove_all(dir);
  cfg.out_dir = dir.string();
  const auto res = run_experiment(cfg);
  std::ifstream rec(dir / "records.csv");
  std::stringstream ss;
  ss << rec.rdbuf();
  EXPECT_EQ(ss.str(), records_csv(res.records));
  EXPECT_TRUE(std::filesystem::exists(dir / "summary.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "trace_0_sdnn.csv"));
  EXPECT_FALSE(std::filesystem::exists(dir / "trace_0_knn.csv"));
  std::filesystem::remove_all(dir);
}

TEST(RunExperiment, ToyClassificationReportsAccuracy) {
  auto cfg = small_config();
  cfg.task = ExperimentTask::kClassificationToy;
  cfg.n_replicates = 2;
  const auto res = run_experiment(cfg);
  for (const auto& r : res.records) {
    EXPECT_GE(r.metric, 0.0);
    EXPECT_LE(r.metric, 1.0);
  }
}

TEST(RunExperiment, CsvSplitHasNoLeakage) {
  // labels encode the row index, so a kNN with k=1 evaluated on the training
  // rows would be perfect; the reported accuracy must come from held-out rows
  const auto dir = std::filesystem::temp_directory_path() / "clipnet_test_csv";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "data.csv");
    out << "a,b,label\n";
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 100; ++i) out << u(rng) << ',' << u(rng) << ',' << (u(rng) < 0.5 ? 1 : -1) << '\n';
  }
  auto cfg = small_config();
  cfg.task = ExperimentTask::kClassificationCsv;
  cfg.csv_path = (dir / "data.csv").string();
  cfg.label_column = "label";
  cfg.estimators = {Estimator::kKnn};
  cfg.grids.ks = {1};
  cfg.n_replicates = 5;
  const auto res = run_experiment(cfg);
  double mean = 0;
  for (const auto& r : res.records) mean += r.metric;
  mean /= res.records.size();
  EXPECT_LT(mean, 0.8);  // random labels: held-out accuracy near 1/2
  std::filesystem::remove_all(dir);
}

TEST(IngestCsv, Examples) {
  const auto dir = std::filesystem::temp_directory_path() / "clipnet_test_ingest";
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream(dir / name) << body;
    return (dir / name).string();
  };
  const auto ok = ingest_csv(write("ok.csv", "x1,y,x2\n0.5,1,2\n1.5,-1,3\n"), "y", Task::kClassification);
  EXPECT_EQ(ok.size(), 2u);
  EXPECT_EQ(ok.dim(), 2u);
  EXPECT_EQ(ok.inputs(1, 1), 1.0);  // columns are min-max scaled
  EXPECT_EQ(ok.inputs(0, 0), 0.0);
  EXPECT_EQ(ok.targets(1), -1.0);
  const auto zero_one = ingest_csv(write("z.csv", "x,y\n1,0\n2,1\n"), "y", Task::kClassification);
  EXPECT_EQ(zero_one.targets(0), -1.0);
  EXPECT_EQ(zero_one.targets(1), 1.0);
  EXPECT_THROW(ingest_csv(write("m.csv", "x,y\n1,1\n"), "label", Task::kClassification), Error);
  EXPECT_THROW(ingest_csv(write("b.csv", "x,y\n1,2\n"), "y", Task::kClassification), Error);
  EXPECT_THROW(ingest_csv(write("r.csv", "x,y\n1\n"), "y", Task::kClassification), Error);
  EXPECT_THROW(ingest_csv(write("n.csv", "x,y\nabc,1\n"), "y", Task::kClassification), Error);
  EXPECT_THROW(ingest_csv((dir / "missing.csv").string(), "y", Task::kClassification), Error);
  std::filesystem::remove_all(dir);
}

TEST(Config, JsonRoundTrip) {
  auto cfg = small_config();
  cfg.function = 4;
  cfg.sdnn.batch_size = 32;
  cfg.sdnn.monotone_policy = MonotonePolicy::kPaperDefault;
  cfg.activation = Activation::parse("tanh");
  cfg.grids.lambdas = {0.25};
  nlohmann::json j = cfg;
  ExperimentConfig back;
  from_json(j, back);
  nlohmann::json k = back;
  EXPECT_EQ(j, k);
  EXPECT_EQ(back.function, 4);
  EXPECT_EQ(*back.sdnn.batch_size, 32u);

  ExperimentConfig partial;
  from_json(nlohmann::json{{"replicates", 2}}, partial);
  EXPECT_EQ(partial.n_replicates, 2u);
  EXPECT_EQ(partial.n_train, 200u);
  EXPECT_THROW(from_json(nlohmann::json{{"estimators", {"svm"}}}, partial), Error);
}

TEST(Config, Validation) {
  auto cfg = small_config();
  cfg.function = 9;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = small_config();
  cfg.grids.taus.clear();
  EXPECT_THROW(cfg.validate(), Error);
  cfg = small_config();
  cfg.n_replicates = 0;
  EXPECT_THROW(cfg.validate(), Error);
}
