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

#include "clipnet/datagen.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <random>
#include <string>

#include "clipnet/error.hpp"

namespace clipnet {
namespace {

constexpr double kSignalVariance = (1.0 - kNoiseShare) / kNoiseShare;  // 19 with Var(noise) = 1

void check_index(int m) {
  if (m < 1 || m > kNumTargets) {
    fail(ErrorCode::kInvalidArgument,
         "target function index must be in 1..6, got " + std::to_string(m));
  }
}

double l1(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

double l2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

double true_function(int m, std::span<const double> x) {
  check_index(m);
  if (x.size() != kSimDim) {
    fail(ErrorCode::kShapeMismatch,
         "target functions take 10 inputs, got " + std::to_string(x.size()));
  }
  // x[0] is x_1
  switch (m) {
    case 1: {
      double s = 0.0;
      for (std::size_t j = 1; j <= kSimDim; ++j) {
        s += ((j % 2 == 0) ? 1.0 : -1.0) / static_cast<double>(j) * x[j - 1];
      }
      return s;
    }
    case 2: return std::sin(l1(x));
    case 3:
      return x[0] * x[1] * x[1] - x[2] +
             std::log(x[3] + 4.0 * x[4] + std::exp(x[5] * x[6] - 5.0 * x[4])) +
             std::tan(x[7] + 0.1);
    case 4: {
      const double arg = 1.0 / (0.01 + std::abs(x[3] - 2.0 * x[4] + x[5]));
      return std::exp(3.0 * x[0] + x[1] * x[1] - std::sqrt(x[2] + 5.0)) +
             0.01 * std::cos(arg) / std::sin(arg);
    }
    case 5: {
      const double gate = x[1] >= x[2] * x[2] ? 1.0 : 0.0;
      return 3.0 * std::exp(l2(x)) * gate + std::pow(x[2], x[3]) -
             x[4] * x[5] * std::pow(x[6], 4);
    }
    case 6: {
      const double g1 = (x[2] + x[3] >= 1.0 && x[4] >= x[5]) ? 1.0 : 0.0;
      const double g2 = (x[0] * x[0] * x[6] * x[7] >= x[8] * std::pow(x[9], 3)) ? 1.0 : 0.0;
      return 4.0 * x[0] * x[1] * x[2] * x[3] * g1 + std::tan(l1(x)) * g2;
    }
  }
  return 0.0;
}

double calibrate_constant(int m, std::size_t mc_samples, std::uint64_t seed) {
  check_index(m);
  require(mc_samples >= 100000, "calibration needs at least 1e5 Monte Carlo samples");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::array<double, kSimDim> x{};
  // Welford
  long double mean = 0.0L, m2 = 0.0L;
  for (std::size_t i = 0; i < mc_samples; ++i) {
    for (double& v : x) v = unif(rng);
    const long double f = true_function(m, x);
    const long double delta = f - mean;
    mean += delta / static_cast<long double>(i + 1);
    m2 += delta * (f - mean);
  }
  const double var = static_cast<double>(m2 / static_cast<long double>(mc_samples - 1));
  if (!(var > 0.0) || !std::isfinite(var)) {
    fail(ErrorCode::kNumeric, "estimated variance of f" + std::to_string(m) + " is not positive");
  }
  return std::sqrt(kSignalVariance / var);
}

double calibrated_constant(int m) {
  check_index(m);
  static std::array<std::once_flag, kNumTargets> once;
  static std::array<double, kNumTargets> cache{};
  std::call_once(once[m - 1], [m] { cache[m - 1] = calibrate_constant(m, 1000000, 0); });
  return cache[m - 1];
}

double target_function(int m, std::span<const double> x) {
  return calibrated_constant(m) * true_function(m, x);
}

Eigen::MatrixXd uniform_inputs(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd x(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) x(i, j) = unif(rng);
  }
  return x;
}

Dataset gen_regression(int m, std::size_t n, std::uint64_t seed) {
  check_index(m);
  require(n >= 1, "sample size must be at least 1");
  const double c = calibrated_constant(m);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  Dataset data;
  data.inputs.resize(n, kSimDim);
  data.targets.resize(n);
  std::array<double, kSimDim> x{};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < kSimDim; ++j) data.inputs(i, j) = x[j] = unif(rng);
    data.targets(i) = c * true_function(m, x) + noise(rng);
  }
  data.task = Task::kRegression;
  data.generator = "f" + std::to_string(m);
  data.seed = seed;
  data.constants["c_m"] = c;
  return data;
}

double toy_mu(std::size_t d) { return static_cast<double>(d / 2) / 3.0; }

double toy_margin(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size() / 2; ++j) s += x[j] * x[j];
  return s - toy_mu(x.size());
}

Dataset gen_classification_toy(std::size_t d, std::size_t n, std::uint64_t seed) {
  require(d >= 2, "toy classification needs d >= 2");
  require(n >= 1, "sample size must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Dataset data;
  data.inputs.resize(n, d);
  data.targets.resize(n);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) data.inputs(i, j) = x[j] = unif(rng);
    const double p1 = 1.0 / (1.0 + std::exp(-toy_margin(x)));
    data.targets(i) = unif(rng) < p1 ? 1.0 : -1.0;
  }
  data.task = Task::kClassification;
  data.generator = "toy";
  data.seed = seed;
  data.constants["mu"] = toy_mu(d);
  return data;
}

double empirical_l2_error(const Predictor& predictor, int m, std::size_t n_test,
                          std::uint64_t seed) {
  check_index(m);
  require(n_test >= 1, "n_test must be at least 1");
  const Eigen::MatrixXd x = uniform_inputs(n_test, kSimDim, seed);
  const Eigen::VectorXd pred = predictor(x);
  if (static_cast<std::size_t>(pred.size()) != n_test) {
    fail(ErrorCode::kShapeMismatch, "predictor returned the wrong number of outputs");
  }
  const double c = calibrated_constant(m);
  std::array<double, kSimDim> row{};
  long double total = 0.0L;
  for (std::size_t i = 0; i < n_test; ++i) {
    for (std::size_t j = 0; j < kSimDim; ++j) row[j] = x(i, j);
    const double r = pred(i) - c * true_function(m, row);
    total += static_cast<long double>(r) * r;
  }
  return static_cast<double>(total / static_cast<long double>(n_test));
}

double noise_share(int m, std::size_t n, std::uint64_t seed) {
  require(n >= 2, "noise share needs at least two samples");
  const Dataset data = gen_regression(m, n, seed);
  const double c = calibrated_constant(m);
  std::array<double, kSimDim> row{};
  long double mean_e = 0.0L, m2_e = 0.0L, mean_y = 0.0L, m2_y = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < kSimDim; ++j) row[j] = data.inputs(i, j);
    const long double y = data.targets(i);
    const long double e = y - c * true_function(m, row);
    const long double k = static_cast<long double>(i + 1);
    long double d = e - mean_e;
    mean_e += d / k;
    m2_e += d * (e - mean_e);
    d = y - mean_y;
    mean_y += d / k;
    m2_y += d * (y - mean_y);
  }
  return static_cast<double>(m2_e / m2_y);
}

}  // namespace clipnet
