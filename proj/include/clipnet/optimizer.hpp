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
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "clipnet/dataset.hpp"
#include "clipnet/loss.hpp"
#include "clipnet/network.hpp"
#include "clipnet/penalty.hpp"

namespace clipnet {

enum class MonotonePolicy {
  kStrict,        // reject non-decreasing inner loops, halve eta and retry
  kPaperDefault,  // accept theta^(t, k_bar + 1) unconditionally
};

struct OptimizerConfig {
  double eta = 1e-2;
  std::size_t k_bar = 10;
  std::size_t outer_iters = 500;
  std::optional<std::size_t> batch_size;  // empty: full batch
  MonotonePolicy monotone_policy = MonotonePolicy::kStrict;
  std::uint64_t seed = 0;

  // Stop once the relative decrease of Q stays below early_stop_tol for
  // early_stop_patience consecutive outer iterations. 0 disables.
  double early_stop_tol = 0.0;
  std::size_t early_stop_patience = 0;

  // Strict mode gives up after this many halvings of eta in one iteration.
  std::size_t max_halvings = 20;

  void validate() const;
};

// One outer iteration (one optimizer step for Adam).
struct TraceRecord {
  std::size_t iteration = 0;
  double objective = 0.0;  // Q after the step
  double risk = 0.0;
  double penalty = 0.0;    // lambda * clipped norm
  double sparsity = 0.0;   // fraction of exactly nonzero coordinates
  std::size_t inner_steps = 0;  // k_t*
  double eta = 0.0;        // learning rate actually used
  bool decreased = true;   // the stopping test Q* <= Q*(theta_t) was met
};

using TraceSink = std::function<void(const TraceRecord&)>;

struct FitReport {
  NetworkParams final_params;
  Eigen::VectorXd final_theta;
  double initial_objective = 0.0;
  std::vector<TraceRecord> trace;
  bool stalled = false;        // strict mode exhausted its halvings
  bool early_stopped = false;
  double max_abs_param = 0.0;  // diagnostic: no projection onto |theta| <= B is made
};

// Closed-form minimiser of the per-coordinate proximal subproblem:
// u = theta - eta (grad - (lambda/tau) h), then soft-threshold u at eta*lambda/tau.
Eigen::VectorXd prox_step(std::span<const double> theta, std::span<const double> grad,
                          std::span<const double> h, double eta, const PenaltyConfig& cfg);

// Soft threshold of a single coordinate.
double soft_threshold(double u, double gamma);

struct InnerResult {
  Eigen::VectorXd theta;   // theta^(t, k*+1)
  std::size_t k_star = 0;
  bool decreased = false;  // Q*(theta|theta_t) <= Q*(theta_t|theta_t)
  double risk = 0.0;       // full-batch risk at theta
  Eigen::VectorXd grad;    // full-batch gradient at theta (full-batch mode only)
  double surrogate = 0.0;
};

// Cached full-batch evaluation at theta_t, so fit() can reuse the gradient
// computed at the end of the previous inner loop.
struct Evaluation {
  double risk = 0.0;
  Eigen::VectorXd grad;
};

class ClippedL1Trainer {
 public:
  ClippedL1Trainer(const MlpSpec& spec, LossKind loss, const Dataset& data,
                   const PenaltyConfig& penalty, const OptimizerConfig& opt);

  // Proximal-gradient iterations on Q*(. | theta_t) with h fixed from theta_t.
  InnerResult inner_loop(const Eigen::VectorXd& theta_t, const Evaluation& at_t, double eta);

  FitReport fit(Eigen::VectorXd theta0, const TraceSink& sink = {});

  Evaluation evaluate(const Eigen::VectorXd& theta) const;

 private:
  Eigen::VectorXd batch_gradient(const Eigen::VectorXd& theta, const Evaluation* full);

  const MlpSpec& spec_;
  LossKind loss_;
  const Dataset& data_;
  PenaltyConfig penalty_;
  OptimizerConfig opt_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::mt19937_64 rng_;
  bool full_batch_;
};

InnerResult inner_loop(const Eigen::VectorXd& theta_t, const MlpSpec& spec, LossKind loss,
                       const Dataset& data, const PenaltyConfig& cfg, const OptimizerConfig& opt);

// CCCP outer loop from init_params(spec, opt.seed).
FitReport fit(const Dataset& data, const MlpSpec& spec, LossKind loss,
              const PenaltyConfig& penalty, const OptimizerConfig& opt,
              const TraceSink& sink = {});

// Same, from a caller-supplied starting point.
FitReport fit_from(const Eigen::VectorXd& theta0, const Dataset& data, const MlpSpec& spec,
                   LossKind loss, const PenaltyConfig& penalty, const OptimizerConfig& opt,
                   const TraceSink& sink = {});

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam on the empirical risk alone; eta is the learning rate and
// outer_iters the number of steps. `checkpoint` (if set) is called after
// each step with the step index and current parameters. Starts from
// theta0 when given, else from init_params(spec, opt.seed).
FitReport adam_fit(const Dataset& data, const MlpSpec& spec, LossKind loss,
                   const OptimizerConfig& opt, const TraceSink& sink = {},
                   const std::function<void(std::size_t, const Eigen::VectorXd&)>& checkpoint = {},
                   AdamConfig adam = {}, const Eigen::VectorXd* theta0 = nullptr);

// Fraction of coordinates that are exactly nonzero.
double sparsity(std::span<const double> theta);
// Fraction of coordinates with |theta_j| > tau.
double sparsity_above(std::span<const double> theta, double tau);

}  // namespace clipnet
