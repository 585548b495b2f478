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

#include <span>

#include <Eigen/Dense>

namespace clipnet {

struct PenaltyConfig {
  double lambda = 1e-3;
  double tau = 1e-2;

  void validate() const;
  double slope() const { return lambda / tau; }  // lambda / tau
};

// sum_j min(|theta_j| / tau, 1)
double clipped_norm(std::span<const double> theta, double tau);

// Convex-minus-convex form of clipped_norm:
//   ||theta||_1 / tau - (1/tau) sum_j (|theta_j| - tau) 1(|theta_j| >= tau)
double clipped_norm_dc(std::span<const double> theta, double tau);

// h_j = sign(theta_j) * 1(|theta_j| > tau), with sign(0) = 0.
Eigen::VectorXd h_vector(std::span<const double> theta, double tau);

// Q(theta) = risk + lambda * clipped_norm(theta, tau)
double objective_q(std::span<const double> theta, double risk, const PenaltyConfig& cfg);

// Convex majorant of Q built at theta_t:
//   risk - <(lambda/tau) h, theta - tau 1> + (lambda/tau) ||theta||_1
double surrogate_q_star(std::span<const double> theta, std::span<const double> theta_t,
                        double risk_at_theta, const PenaltyConfig& cfg);

// Same, with h already computed from theta_t.
double surrogate_q_star_h(std::span<const double> theta, const Eigen::VectorXd& h,
                          double risk_at_theta, const PenaltyConfig& cfg);

}  // namespace clipnet
