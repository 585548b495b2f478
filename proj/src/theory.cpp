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

#include "clipnet/theory.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "clipnet/error.hpp"
#include "clipnet/parallel.hpp"

namespace clipnet::theory {
namespace {

void check_class(const ClassParams& p) {
  if (!(p.delta > 0.0)) fail(ErrorCode::kInvalidArgument, "covering radius delta must be positive");
  require(p.B >= 1.0, "parameter bound B must be at least 1");
  require(p.L >= 0.0 && p.N >= 0.0 && p.S >= 0.0, "L, N and S must be nonnegative");
}

std::mt19937_64 trial_rng(std::uint64_t seed, std::size_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

struct TrialOutcome {
  bool violated = false;
  double ratio = 0.0;
};

TrialOutcome lipschitz_trial(const MlpSpec& spec, double B, const Eigen::MatrixXd& grid,
                             std::mt19937_64& rng, std::size_t variant) {
  const std::size_t p = param_count(spec);
  std::uniform_real_distribution<double> unif(-B, B);
  Eigen::VectorXd t1(p), t2(p);
  for (std::size_t j = 0; j < p; ++j) t1(j) = unif(rng);
  switch (variant % 3) {
    case 0:  // independent draw
      for (std::size_t j = 0; j < p; ++j) t2(j) = unif(rng);
      break;
    case 1: {  // small perturbation, kept inside the box
      std::uniform_real_distribution<double> step(-0.01 * B, 0.01 * B);
      for (std::size_t j = 0; j < p; ++j) t2(j) = std::clamp(t1(j) + step(rng), -B, B);
      break;
    }
    default: {  // single coordinate moved
      t2 = t1;
      std::uniform_int_distribution<std::size_t> pick(0, p - 1);
      t2(pick(rng)) = unif(rng);
      break;
    }
  }
  const double dtheta = (t1 - t2).cwiseAbs().maxCoeff();
  const double bound = lipschitz_bound(static_cast<double>(spec.depth()),
                                       static_cast<double>(spec.width()), B);
  const Eigen::VectorXd f1 = predict(spec, as_span(t1), grid);
  const Eigen::VectorXd f2 = predict(spec, as_span(t2), grid);
  const double gap = (f1 - f2).cwiseAbs().maxCoeff();
  TrialOutcome out;
  out.violated = gap > bound * dtheta;
  out.ratio = dtheta > 0.0 ? gap / (bound * dtheta) : 0.0;
  return out;
}

LipschitzReport merge(const std::vector<TrialOutcome>& outcomes) {
  LipschitzReport r;
  r.trials = outcomes.size();
  for (const auto& o : outcomes) {
    r.violations += o.violated ? 1 : 0;
    r.max_ratio = std::max(r.max_ratio, o.ratio);
  }
  return r;
}

}  // namespace

double lipschitz_bound(double L, double N, double B) {
  return (L + 1.0) * std::pow((N + 1.0) * B, L + 1.0);
}

BoundValue covering_bound(const ClassParams& p) {
  check_class(p);
  const double v = 2.0 * p.S * (p.L + 1.0) * std::log((p.L + 1.0) * (p.N + 1.0) * p.B / p.delta);
  return {v, v < 0.0};
}

BoundValue covering_bound_clipped(const ClassParams& p) {
  check_class(p);
  require(p.tau >= 0.0, "clipping threshold tau must be nonnegative");
  const double zeta = lipschitz_bound(p.L, p.N, p.B);
  const double shift = p.tau * zeta;
  if (!(p.delta > shift)) {
    fail(ErrorCode::kPrecondition, "covering radius must exceed tau*(L+1)((N+1)B)^(L+1) = " +
                                       std::to_string(shift));
  }
  const double v =
      2.0 * p.S * (p.L + 1.0) * std::log((p.L + 1.0) * (p.N + 1.0) * p.B / (p.delta - shift));
  return {v, v < 0.0};
}

Eigen::VectorXd hard_threshold(std::span<const double> theta, double tau) {
  require(tau >= 0.0, "threshold must be nonnegative");
  Eigen::VectorXd out(static_cast<Eigen::Index>(theta.size()));
  for (std::size_t j = 0; j < theta.size(); ++j) {
    out(j) = std::abs(theta[j]) > tau ? theta[j] : 0.0;
  }
  return out;
}

std::size_t l0_norm(std::span<const double> theta) {
  return static_cast<std::size_t>(
      std::count_if(theta.begin(), theta.end(), [](double v) { return v != 0.0; }));
}

Eigen::MatrixXd unit_grid(std::size_t d, std::size_t grid_size) {
  require(d >= 1, "grid dimension must be positive");
  std::size_t per_axis =
      static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(grid_size), 1.0 / d) - 1e-9));
  per_axis = std::max<std::size_t>(per_axis, 2);
  std::size_t total = 1;
  for (std::size_t j = 0; j < d; ++j) total *= per_axis;
  Eigen::MatrixXd grid(total, d);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rem = i;
    for (std::size_t j = 0; j < d; ++j) {
      grid(i, j) = static_cast<double>(rem % per_axis) / static_cast<double>(per_axis - 1);
      rem /= per_axis;
    }
  }
  return grid;
}

LipschitzReport verify_lipschitz(const LipschitzSweep& sweep) {
  require(sweep.max_B >= 1.0, "B must be at least 1");
  require(sweep.activation.lipschitz() <= 1.0, "the bound assumes a 1-Lipschitz activation");
  std::vector<TrialOutcome> outcomes(sweep.trials);
  parallel_for(sweep.trials, [&](std::size_t i) {
    auto rng = trial_rng(sweep.seed, i);
    std::uniform_int_distribution<std::size_t> dim(1, sweep.max_dim);
    std::uniform_int_distribution<std::size_t> depth(1, sweep.max_depth);
    std::uniform_int_distribution<std::size_t> width(1, sweep.max_width);
    std::uniform_real_distribution<double> bound(1.0, sweep.max_B);
    MlpSpec spec;
    spec.input_dim = dim(rng);
    spec.hidden_widths.assign(depth(rng), 1);
    for (auto& w : spec.hidden_widths) w = width(rng);
    spec.activation = sweep.activation;
    const double B = bound(rng);
    const Eigen::MatrixXd grid = unit_grid(spec.input_dim, sweep.grid_size);
    outcomes[i] = lipschitz_trial(spec, B, grid, rng, i);
  });
  return merge(outcomes);
}

LipschitzReport verify_lipschitz(const MlpSpec& spec, double B, std::size_t trials,
                                 std::size_t grid_size, std::uint64_t seed) {
  spec.validate();
  require(B >= 1.0, "B must be at least 1");
  require(spec.activation.lipschitz() <= 1.0, "the bound assumes a 1-Lipschitz activation");
  const Eigen::MatrixXd grid = unit_grid(spec.input_dim, grid_size);
  std::vector<TrialOutcome> outcomes(trials);
  parallel_for(trials, [&](std::size_t i) {
    auto rng = trial_rng(seed, i);
    outcomes[i] = lipschitz_trial(spec, B, grid, rng, i);
  });
  return merge(outcomes);
}

double identity_error(const NetworkParams& params, const MlpSpec& spec, double lo, double hi,
                      std::size_t grid_points) {
  require(grid_points >= 2, "need at least two grid points");
  Eigen::MatrixXd xs(grid_points, 1);
  for (std::size_t i = 0; i < grid_points; ++i) {
    xs(i, 0) = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
  }
  const Eigen::VectorXd theta = flatten(params);
  const Eigen::VectorXd f = predict(spec, as_span(theta), xs);
  return (f - xs.col(0)).cwiseAbs().maxCoeff();
}

IdentityNet identity_net_for_scale(double K, double delta, const Activation& activation,
                                   std::size_t grid_points) {
  require(K > 0.0, "scale K must be positive");
  require(delta >= 0.0, "delta must be nonnegative");
  const auto t = activation.expansion_point();
  if (!t) {
    fail(ErrorCode::kPrecondition,
         activation.name() + " has no point with nonzero first and second derivative");
  }
  const double d1 = activation.deriv(*t);
  const double d2 = activation.deriv2(*t);
  if (d1 == 0.0 || d2 == 0.0) {
    fail(ErrorCode::kPrecondition, "expansion point of " + activation.name() + " is degenerate");
  }
  IdentityNet net;
  net.spec.input_dim = 1;
  net.spec.hidden_widths = {1};
  net.spec.activation = activation;
  net.t = *t;
  net.K = K;
  net.params = zero_params(net.spec);
  net.params.weights[0](0, 0) = 1.0 / K;
  net.params.biases[0](0) = *t;
  net.params.weights[1](0, 0) = K / d1;
  net.params.biases[1](0) = -K * activation.value(*t) / d1;
  net.sup_error = identity_error(net.params, net.spec, -delta, 1.0 + delta, grid_points);
  return net;
}

IdentityNet identity_net(double delta, double epsilon, const Activation& activation,
                         std::size_t grid_points) {
  require(epsilon > 0.0, "epsilon must be positive");
  require(delta >= 0.0, "delta must be nonnegative");
  const double base = (1.0 + delta) * (1.0 + delta) / epsilon;
  double c1 = 1.0;
  for (int doubling = 0; doubling < 64; ++doubling, c1 *= 2.0) {
    IdentityNet net = identity_net_for_scale(c1 * base, delta, activation, grid_points);
    net.C1 = c1;
    if (net.sup_error <= epsilon) return net;
  }
  fail(ErrorCode::kNumeric, "identity construction did not reach epsilon = " +
                                std::to_string(epsilon) + " for " + activation.name());
}

}  // namespace clipnet::theory
