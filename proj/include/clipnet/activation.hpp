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

#include <optional>
#include <string>
#include <string_view>

namespace clipnet {

enum class ActivationTag {
  kReLU,
  kLeakyReLU,
  kSigmoid,
  kTanh,
  kSoftplus,
  kSwish,
  kELU,
  kSoftsign,
  kISRU,
  kISRLU,
};

enum class ActivationFamily { kPiecewiseLinear, kLocallyQuadratic };

// An activation function together with its shape parameter `a` (used by
// LeakyReLU, ELU, ISRU and ISRLU; ignored otherwise).
class Activation {
 public:
  Activation() = default;
  explicit Activation(ActivationTag tag, double a = 0.0);

  static Activation relu() { return Activation(ActivationTag::kReLU); }
  static Activation sigmoid() { return Activation(ActivationTag::kSigmoid); }
  static Activation tanh() { return Activation(ActivationTag::kTanh); }
  static Activation softplus() { return Activation(ActivationTag::kSoftplus); }

  // Accepts "relu", "leaky_relu", "sigmoid", ..., with an optional
  // ":<a>" suffix for parameterised kinds.
  static Activation parse(std::string_view name);

  ActivationTag tag() const { return tag_; }
  double param() const { return a_; }
  ActivationFamily family() const;
  std::string name() const;

  // Global Lipschitz constant on R.
  double lipschitz() const;

  double value(double z) const;
  // First derivative; the subgradient 0 is used at ReLU-type kinks.
  double deriv(double z) const;
  // Second derivative where it exists (one-sided at kinks).
  double deriv2(double z) const;

  // Expansion point t with rho'(t) != 0 and rho''(t) != 0, used by the
  // identity-network construction. Empty for piecewise-linear kinds.
  std::optional<double> expansion_point() const;

  bool operator==(const Activation&) const = default;

 private:
  ActivationTag tag_ = ActivationTag::kReLU;
  double a_ = 0.0;
};

}  // namespace clipnet
