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
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "clipnet/activation.hpp"
#include "clipnet/dataset.hpp"
#include "clipnet/loss.hpp"

namespace clipnet {

// Fully connected architecture d -> N_1 -> ... -> N_L -> 1.
struct MlpSpec {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_widths{1};
  std::size_t output_dim = 1;
  Activation activation;
  std::optional<double> output_bound;  // F

  void validate() const;
  std::size_t depth() const { return hidden_widths.size(); }
  std::size_t width() const;
  // Width of layer l for l = 0 (input) ... L+1 (output).
  std::size_t layer_width(std::size_t l) const;
  std::size_t num_affine() const { return hidden_widths.size() + 1; }
};

// p = sum over affine maps of (N_l * N_{l-1} + N_l).
std::size_t param_count(const MlpSpec& spec);

struct NetworkParams {
  std::vector<Eigen::MatrixXd> weights;  // W_l is N_l x N_{l-1}
  std::vector<Eigen::VectorXd> biases;   // b_l has length N_l

  bool operator==(const NetworkParams& other) const;
};

// Layer-major; within each layer vec(W_l) (columns concatenated) precedes b_l.
Eigen::VectorXd flatten(const NetworkParams& params);
NetworkParams unflatten(const MlpSpec& spec, std::span<const double> theta);

NetworkParams zero_params(const MlpSpec& spec);

// Weights ~ U[-sqrt(6/(fan_in+fan_out)), +sqrt(...)], biases zero.
NetworkParams init_params(const MlpSpec& spec, std::uint64_t seed);

struct ForwardOptions {
  bool clamp_output = false;  // clip to [-F, F] when spec.output_bound is set
};

double forward(const NetworkParams& params, const MlpSpec& spec,
               std::span<const double> x, ForwardOptions opts = {});

// Batched evaluation on the flat parameter vector; one output per input row.
Eigen::VectorXd predict(const MlpSpec& spec, std::span<const double> theta,
                        const Eigen::MatrixXd& inputs, ForwardOptions opts = {});

struct RiskAndGrad {
  double risk = 0.0;
  Eigen::VectorXd grad;
};

// Mean loss over the selected rows (all rows when `rows` is empty) and its
// exact gradient with respect to the flat parameter vector.
RiskAndGrad risk_and_grad(const MlpSpec& spec, std::span<const double> theta,
                          LossKind loss, const Dataset& data,
                          std::span<const std::size_t> rows = {},
                          ForwardOptions opts = {});

Eigen::VectorXd grad(const NetworkParams& params, const MlpSpec& spec,
                     LossKind loss, const Dataset& batch);

double empirical_risk(const MlpSpec& spec, std::span<const double> theta,
                      LossKind loss, const Dataset& data,
                      ForwardOptions opts = {});
double empirical_risk(const NetworkParams& params, const MlpSpec& spec,
                      LossKind loss, const Dataset& data);

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace clipnet
