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

#include "clipnet/penalty.hpp"

#include <algorithm>
#include <cmath>

#include "clipnet/error.hpp"

namespace clipnet {

void PenaltyConfig::validate() const {
  require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be finite and nonnegative");
  require(tau > 0.0 && std::isfinite(tau), "tau must be positive");
}

double clipped_norm(std::span<const double> theta, double tau) {
  require(tau > 0.0, "clipping threshold tau must be positive");
  double total = 0.0;
  for (double v : theta) total += std::min(std::abs(v) / tau, 1.0);
  return total;
}

double clipped_norm_dc(std::span<const double> theta, double tau) {
  require(tau > 0.0, "clipping threshold tau must be positive");
  double l1 = 0.0;
  double excess = 0.0;
  for (double v : theta) {
    const double a = std::abs(v);
    l1 += a;
    if (a >= tau) excess += a - tau;
  }
  return l1 / tau - excess / tau;
}

Eigen::VectorXd h_vector(std::span<const double> theta, double tau) {
  require(tau > 0.0, "clipping threshold tau must be positive");
  Eigen::VectorXd h(static_cast<Eigen::Index>(theta.size()));
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const double v = theta[j];
    h(j) = std::abs(v) > tau ? (v > 0 ? 1.0 : -1.0) : 0.0;
  }
  return h;
}

double objective_q(std::span<const double> theta, double risk, const PenaltyConfig& cfg) {
  if (cfg.lambda == 0.0) return risk;
  return risk + cfg.lambda * clipped_norm(theta, cfg.tau);
}

double surrogate_q_star_h(std::span<const double> theta, const Eigen::VectorXd& h,
                          double risk_at_theta, const PenaltyConfig& cfg) {
  require(static_cast<std::size_t>(h.size()) == theta.size(),
          "surrogate needs theta and h of equal length");
  // Per coordinate: (lambda/tau) * (|theta_j| - (h_j theta_j - tau |h_j|)), the
  // second term being the tangent of max(|theta_j| - tau, 0) at theta_t.
  double total = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    total += std::abs(theta[j]) - (h(j) * theta[j] - cfg.tau * std::abs(h(j)));
  }
  return risk_at_theta + cfg.slope() * total;
}

double surrogate_q_star(std::span<const double> theta, std::span<const double> theta_t,
                        double risk_at_theta, const PenaltyConfig& cfg) {
  require(theta.size() == theta_t.size(), "theta and theta_t must have equal length");
  return surrogate_q_star_h(theta, h_vector(theta_t, cfg.tau), risk_at_theta, cfg);
}

}  // namespace clipnet
