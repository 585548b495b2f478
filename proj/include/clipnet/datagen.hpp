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
#include <span>

#include <Eigen/Dense>

#include "clipnet/dataset.hpp"

namespace clipnet {

inline constexpr std::size_t kSimDim = 10;
inline constexpr int kNumTargets = 6;

// Ratio Var(noise)/Var(response) the regression generators are calibrated to.
inline constexpr double kNoiseShare = 0.05;

// Uncalibrated target f~_m (the bracketed expression of f*_m), m in 1..6,
// x in [0,1]^10.
double true_function(int m, std::span<const double> x);

// Calibration constant c_m = sqrt(19 / Var(f~_m(X))), X ~ U[0,1]^10, with
// the variance estimated from `mc_samples` Monte Carlo draws.
double calibrate_constant(int m, std::size_t mc_samples, std::uint64_t seed);

// c_m at 10^6 samples with seed 0, computed once per m and cached.
double calibrated_constant(int m);

// f*_m = c_m f~_m.
double target_function(int m, std::span<const double> x);

// X ~ U[0,1]^10, Y = c_m f~_m(X) + N(0,1).
Dataset gen_regression(int m, std::size_t n, std::uint64_t seed);

// g*(x) = sum_{j <= floor(d/2)} x_j^2 - mu, mu = floor(d/2)/3.
double toy_margin(std::span<const double> x);
double toy_mu(std::size_t d);

// X ~ U[0,1]^d, P(Y = 1 | x) = 1 / (1 + exp(-g*(x))).
Dataset gen_classification_toy(std::size_t d, std::size_t n, std::uint64_t seed);

// Uniform inputs on [0,1]^d.
Eigen::MatrixXd uniform_inputs(std::size_t n, std::size_t d, std::uint64_t seed);

using Predictor = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

// Mean of (predictor(X_i) - f*_m(X_i))^2 over n_test fresh noiseless inputs.
double empirical_l2_error(const Predictor& predictor, int m, std::size_t n_test,
                          std::uint64_t seed);

// Sample Var(Y - f*_m(X)) / Var(Y) over n draws of gen_regression(m, n, seed).
double noise_share(int m, std::size_t n, std::uint64_t seed);

}  // namespace clipnet
