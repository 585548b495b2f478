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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clipnet/activation.hpp"
#include "clipnet/network.hpp"

namespace clipnet::theory {

// Constants describing a sparsity-constrained network class.
struct ClassParams {
  double L = 1;      // depth
  double N = 1;      // width
  double B = 1;      // parameter bound, >= 1
  double S = 1;      // sparsity budget
  double delta = 1;  // covering radius
  double tau = 0;    // clipping threshold
  double F = 1;      // output bound
};

struct BoundValue {
  double value = 0.0;
  bool vacuous = false;  // negative log-covering bound
};

// (L+1) ((N+1) B)^(L+1)
double lipschitz_bound(double L, double N, double B);

// 2 S (L+1) log((L+1)(N+1)B / delta)
BoundValue covering_bound(const ClassParams& p);

// 2 S (L+1) log((L+1)(N+1)B / (delta - tau * zeta)),
// zeta = lipschitz_bound(L, N, B); requires delta > tau * zeta.
BoundValue covering_bound_clipped(const ClassParams& p);

// theta_j * 1(|theta_j| > tau)
Eigen::VectorXd hard_threshold(std::span<const double> theta, double tau);

std::size_t l0_norm(std::span<const double> theta);

struct LipschitzReport {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double max_ratio = 0.0;  // max of grid-sup |f1 - f2| / (bound * ||theta1 - theta2||_inf)
};

// Samples `trials` random architectures with d <= max_dim, depth <= max_depth,
// width <= max_width, and parameter pairs with ||theta||_inf <= B (B drawn in
// [1, max_B]); compares the grid-sup output gap with the Lipschitz bound.
struct LipschitzSweep {
  std::size_t trials = 1000;
  std::size_t grid_size = 10000;
  std::size_t max_dim = 3;
  std::size_t max_depth = 2;
  std::size_t max_width = 4;
  double max_B = 2.0;
  std::uint64_t seed = 0;
  Activation activation = Activation::relu();
};

LipschitzReport verify_lipschitz(const LipschitzSweep& sweep);

// One fixed architecture at one bound B.
LipschitzReport verify_lipschitz(const MlpSpec& spec, double B, std::size_t trials,
                                 std::size_t grid_size, std::uint64_t seed);

// Deterministic lattice of roughly `grid_size` points covering [0,1]^d.
Eigen::MatrixXd unit_grid(std::size_t d, std::size_t grid_size);

struct IdentityNet {
  MlpSpec spec;
  NetworkParams params;
  double t = 0.0;           // expansion point
  double K = 0.0;           // scale
  double C1 = 0.0;          // K = C1 (1 + delta)^2 / epsilon
  double sup_error = 0.0;   // grid-sup |f(x) - x| on [-delta, 1 + delta]
};

// One-hidden-node network f(x) = (K / rho'(t)) [rho(x / K + t) - rho(t)],
// with K doubled from (1+delta)^2/epsilon until the grid-sup error on
// [-delta, 1+delta] is at most epsilon.
IdentityNet identity_net(double delta, double epsilon, const Activation& activation,
                         std::size_t grid_points = 10000);

// Network for a given scale K (no search).
IdentityNet identity_net_for_scale(double K, double delta, const Activation& activation,
                                   std::size_t grid_points = 10000);

// Grid-sup |f(x) - x| over [lo, hi].
double identity_error(const NetworkParams& params, const MlpSpec& spec, double lo, double hi,
                      std::size_t grid_points);

}  // namespace clipnet::theory
