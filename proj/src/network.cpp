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

#include "clipnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "clipnet/error.hpp"

namespace clipnet {
namespace {

using MatMap = Eigen::Map<const Eigen::MatrixXd>;
using VecMap = Eigen::Map<const Eigen::VectorXd>;

// Locations of W_l and b_l inside the flat vector.
struct LayerSlot {
  std::size_t rows, cols, w_offset, b_offset;
};

std::vector<LayerSlot> layout(const MlpSpec& spec) {
  std::vector<LayerSlot> slots;
  std::size_t offset = 0;
  for (std::size_t l = 1; l <= spec.num_affine(); ++l) {
    LayerSlot s{spec.layer_width(l), spec.layer_width(l - 1), offset, 0};
    s.b_offset = s.w_offset + s.rows * s.cols;
    offset = s.b_offset + s.rows;
    slots.push_back(s);
  }
  return slots;
}

void apply_activation(const Activation& act, Eigen::MatrixXd& z) {
  if (act.tag() == ActivationTag::kReLU) {
    z = z.cwiseMax(0.0);
    return;
  }
  z = z.unaryExpr([&act](double v) { return act.value(v); });
}

Eigen::MatrixXd activation_deriv(const Activation& act, const Eigen::MatrixXd& z) {
  if (act.tag() == ActivationTag::kReLU) {
    return (z.array() > 0.0).cast<double>().matrix();
  }
  return z.unaryExpr([&act](double v) { return act.deriv(v); });
}

void check_theta(const MlpSpec& spec, std::span<const double> theta) {
  const std::size_t p = param_count(spec);
  if (theta.size() != p) {
    fail(ErrorCode::kShapeMismatch, "parameter vector has length " +
                                        std::to_string(theta.size()) +
                                        ", architecture needs " + std::to_string(p));
  }
}

double sup_norm(std::span<const double> theta) {
  double m = 0.0;
  for (double v : theta) m = std::max(m, std::abs(v));
  return m;
}

[[noreturn]] void non_finite(std::size_t layer, std::span<const double> theta) {
  fail(ErrorCode::kNumeric, "non-finite activation at layer " + std::to_string(layer) +
                                " (max |theta_j| = " + std::to_string(sup_norm(theta)) + ")");
}

// Forward pass over a d x m block of column inputs. Keeps pre-activations
// when `pre` is non-null (needed for backprop).
Eigen::RowVectorXd forward_block(const MlpSpec& spec, const std::vector<LayerSlot>& slots,
                                 std::span<const double> theta, Eigen::MatrixXd a,
                                 std::vector<Eigen::MatrixXd>* pre,
                                 std::vector<Eigen::MatrixXd>* post) {
  const std::size_t n_affine = slots.size();
  for (std::size_t l = 0; l < n_affine; ++l) {
    const LayerSlot& s = slots[l];
    MatMap w(theta.data() + s.w_offset, s.rows, s.cols);
    VecMap b(theta.data() + s.b_offset, s.rows);
    if (post) post->push_back(a);
    Eigen::MatrixXd z = w * a;
    z.colwise() += b;
    if (!z.allFinite()) non_finite(l + 1, theta);
    if (l + 1 == n_affine) return z.row(0);
    if (pre) pre->push_back(z);
    apply_activation(spec.activation, z);
    a = std::move(z);
  }
  return {};
}

double clamp_output(double v, const MlpSpec& spec, ForwardOptions opts) {
  if (opts.clamp_output && spec.output_bound) {
    const double f = *spec.output_bound;
    return std::clamp(v, -f, f);
  }
  return v;
}

Eigen::MatrixXd gather_columns(const Dataset& data, std::span<const std::size_t> rows) {
  if (rows.empty()) return data.inputs.transpose();
  Eigen::MatrixXd a(data.dim(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) a.col(i) = data.inputs.row(rows[i]).transpose();
  return a;
}

}  // namespace

void MlpSpec::validate() const {
  require(input_dim >= 1, "input_dim must be positive");
  require(!hidden_widths.empty(), "at least one hidden layer is required");
  for (std::size_t w : hidden_widths) require(w >= 1, "hidden widths must be positive");
  require(output_dim == 1, "only scalar-output networks are supported");
  if (output_bound) require(*output_bound > 0.0, "output bound F must be positive");
}

std::size_t MlpSpec::width() const {
  return *std::max_element(hidden_widths.begin(), hidden_widths.end());
}

std::size_t MlpSpec::layer_width(std::size_t l) const {
  if (l == 0) return input_dim;
  if (l <= hidden_widths.size()) return hidden_widths[l - 1];
  return output_dim;
}

std::size_t param_count(const MlpSpec& spec) {
  std::size_t p = 0;
  for (std::size_t l = 1; l <= spec.num_affine(); ++l) {
    p += spec.layer_width(l) * spec.layer_width(l - 1) + spec.layer_width(l);
  }
  return p;
}

bool NetworkParams::operator==(const NetworkParams& other) const {
  if (weights.size() != other.weights.size() || biases.size() != other.biases.size()) return false;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != other.weights[l].rows() ||
        weights[l].cols() != other.weights[l].cols() || weights[l] != other.weights[l]) {
      return false;
    }
    if (biases[l].size() != other.biases[l].size() || biases[l] != other.biases[l]) return false;
  }
  return true;
}

Eigen::VectorXd flatten(const NetworkParams& params) {
  std::size_t p = 0;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    p += params.weights[l].size() + params.biases[l].size();
  }
  Eigen::VectorXd theta(p);
  std::size_t offset = 0;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const auto& w = params.weights[l];
    std::copy(w.data(), w.data() + w.size(), theta.data() + offset);
    offset += w.size();
    const auto& b = params.biases[l];
    std::copy(b.data(), b.data() + b.size(), theta.data() + offset);
    offset += b.size();
  }
  return theta;
}

NetworkParams unflatten(const MlpSpec& spec, std::span<const double> theta) {
  check_theta(spec, theta);
  NetworkParams params;
  for (const LayerSlot& s : layout(spec)) {
    params.weights.emplace_back(MatMap(theta.data() + s.w_offset, s.rows, s.cols));
    params.biases.emplace_back(VecMap(theta.data() + s.b_offset, s.rows));
  }
  return params;
}

NetworkParams zero_params(const MlpSpec& spec) {
  spec.validate();
  NetworkParams params;
  for (std::size_t l = 1; l <= spec.num_affine(); ++l) {
    params.weights.push_back(Eigen::MatrixXd::Zero(spec.layer_width(l), spec.layer_width(l - 1)));
    params.biases.push_back(Eigen::VectorXd::Zero(spec.layer_width(l)));
  }
  return params;
}

NetworkParams init_params(const MlpSpec& spec, std::uint64_t seed) {
  NetworkParams params = zero_params(spec);
  std::mt19937_64 rng(seed);
  for (auto& w : params.weights) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> unif(-limit, limit);
    // column-major fill so the draw order matches the flat layout
    for (Eigen::Index j = 0; j < w.size(); ++j) w.data()[j] = unif(rng);
  }
  return params;
}

double forward(const NetworkParams& params, const MlpSpec& spec, std::span<const double> x,
               ForwardOptions opts) {
  spec.validate();
  if (params.weights.size() != spec.num_affine() || params.biases.size() != spec.num_affine()) {
    fail(ErrorCode::kShapeMismatch, "network has " + std::to_string(params.weights.size()) +
                                        " layers, architecture needs " +
                                        std::to_string(spec.num_affine()));
  }
  for (std::size_t l = 1; l <= spec.num_affine(); ++l) {
    const auto& w = params.weights[l - 1];
    const auto& b = params.biases[l - 1];
    if (static_cast<std::size_t>(w.rows()) != spec.layer_width(l) ||
        static_cast<std::size_t>(w.cols()) != spec.layer_width(l - 1) ||
        static_cast<std::size_t>(b.size()) != spec.layer_width(l)) {
      fail(ErrorCode::kShapeMismatch, "layer " + std::to_string(l) + " has shape " +
                                          std::to_string(w.rows()) + "x" +
                                          std::to_string(w.cols()) + ", expected " +
                                          std::to_string(spec.layer_width(l)) + "x" +
                                          std::to_string(spec.layer_width(l - 1)));
    }
  }
  if (x.size() != spec.input_dim) {
    fail(ErrorCode::kShapeMismatch, "input has length " + std::to_string(x.size()) +
                                        ", expected " + std::to_string(spec.input_dim));
  }
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  for (std::size_t l = 0; l < spec.num_affine(); ++l) {
    Eigen::VectorXd z = params.weights[l] * a + params.biases[l];
    if (l + 1 == spec.num_affine()) return clamp_output(z(0), spec, opts);
    a = z.unaryExpr([&spec](double v) { return spec.activation.value(v); });
  }
  return 0.0;
}

Eigen::VectorXd predict(const MlpSpec& spec, std::span<const double> theta,
                        const Eigen::MatrixXd& inputs, ForwardOptions opts) {
  spec.validate();
  check_theta(spec, theta);
  if (static_cast<std::size_t>(inputs.cols()) != spec.input_dim) {
    fail(ErrorCode::kShapeMismatch, "inputs have " + std::to_string(inputs.cols()) +
                                        " columns, expected " + std::to_string(spec.input_dim));
  }
  const auto slots = layout(spec);
  const Eigen::Index n = inputs.rows();
  constexpr Eigen::Index kChunk = 4096;
  Eigen::VectorXd out(n);
  for (Eigen::Index start = 0; start < n; start += kChunk) {
    const Eigen::Index m = std::min(kChunk, n - start);
    Eigen::MatrixXd a = inputs.middleRows(start, m).transpose();
    Eigen::RowVectorXd f = forward_block(spec, slots, theta, std::move(a), nullptr, nullptr);
    for (Eigen::Index i = 0; i < m; ++i) out(start + i) = clamp_output(f(i), spec, opts);
  }
  return out;
}

RiskAndGrad risk_and_grad(const MlpSpec& spec, std::span<const double> theta, LossKind loss,
                          const Dataset& data, std::span<const std::size_t> rows,
                          ForwardOptions opts) {
  spec.validate();
  check_theta(spec, theta);
  if (data.dim() != spec.input_dim) {
    fail(ErrorCode::kShapeMismatch, "data has dimension " + std::to_string(data.dim()) +
                                        ", expected " + std::to_string(spec.input_dim));
  }
  const std::size_t m = rows.empty() ? data.size() : rows.size();
  require(m > 0, "gradient needs a nonempty batch");

  const auto slots = layout(spec);
  std::vector<Eigen::MatrixXd> pre, post;
  pre.reserve(slots.size());
  post.reserve(slots.size());
  Eigen::RowVectorXd f =
      forward_block(spec, slots, theta, gather_columns(data, rows), &pre, &post);

  const double bound = (opts.clamp_output && spec.output_bound) ? *spec.output_bound : 0.0;
  Eigen::RowVectorXd delta(m);
  double total = 0.0;
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double y = data.targets(rows.empty() ? i : rows[i]);
    double out = f(i);
    double pass = 1.0;
    if (bound > 0.0 && std::abs(out) > bound) {
      out = std::clamp(out, -bound, bound);
      pass = 0.0;
    }
    total += loss_value(loss, y, out);
    delta(i) = pass * loss_deriv(loss, y, out) * inv_m;
  }

  RiskAndGrad result;
  result.risk = total * inv_m;
  result.grad.resize(static_cast<Eigen::Index>(theta.size()));

  // delta holds dRisk/dz for the current affine output, one column per sample
  Eigen::MatrixXd g = delta;
  for (std::size_t l = slots.size(); l-- > 0;) {
    const LayerSlot& s = slots[l];
    Eigen::Map<Eigen::MatrixXd> gw(result.grad.data() + s.w_offset, s.rows, s.cols);
    Eigen::Map<Eigen::VectorXd> gb(result.grad.data() + s.b_offset, s.rows);
    gw.noalias() = g * post[l].transpose();
    gb = g.rowwise().sum();
    if (l == 0) break;
    MatMap w(theta.data() + s.w_offset, s.rows, s.cols);
    Eigen::MatrixXd back = w.transpose() * g;
    g = back.cwiseProduct(activation_deriv(spec.activation, pre[l - 1]));
    if (!g.allFinite()) non_finite(l, theta);
  }
  if (!result.grad.allFinite()) non_finite(slots.size(), theta);
  return result;
}

Eigen::VectorXd grad(const NetworkParams& params, const MlpSpec& spec, LossKind loss,
                     const Dataset& batch) {
  const Eigen::VectorXd theta = flatten(params);
  return risk_and_grad(spec, as_span(theta), loss, batch).grad;
}

double empirical_risk(const MlpSpec& spec, std::span<const double> theta, LossKind loss,
                      const Dataset& data, ForwardOptions opts) {
  require(!data.empty(), "empirical risk needs nonempty data");
  const Eigen::VectorXd f = predict(spec, theta, data.inputs, opts);
  double total = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) total += loss_value(loss, data.targets(i), f(i));
  return total / static_cast<double>(f.size());
}

double empirical_risk(const NetworkParams& params, const MlpSpec& spec, LossKind loss,
                      const Dataset& data) {
  const Eigen::VectorXd theta = flatten(params);
  return empirical_risk(spec, as_span(theta), loss, data);
}

}  // namespace clipnet
