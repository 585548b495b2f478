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

#include "clipnet/activation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "clipnet/error.hpp"

namespace clipnet {
namespace {

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double default_param(ActivationTag tag) {
  switch (tag) {
    case ActivationTag::kLeakyReLU: return 0.01;
    case ActivationTag::kELU:
    case ActivationTag::kISRU:
    case ActivationTag::kISRLU: return 1.0;
    default: return 0.0;
  }
}

bool uses_param(ActivationTag tag) { return default_param(tag) != 0.0; }

// max over z of d/dz [z * sigmoid(z)], attained near z = 2.3994
constexpr double kSwishLipschitz = 1.099839320128867;

}  // namespace

Activation::Activation(ActivationTag tag, double a) : tag_(tag), a_(a) {
  if (!uses_param(tag)) {
    a_ = 0.0;
    return;
  }
  if (a_ == 0.0) a_ = default_param(tag);
  if (tag == ActivationTag::kLeakyReLU) {
    require(a_ > 0.0 && a_ < 1.0, "leaky_relu slope must lie in (0,1)");
  } else {
    require(a_ > 0.0, name() + " parameter must be positive");
  }
}

Activation Activation::parse(std::string_view spec) {
  std::string name(spec);
  double a = 0.0;
  if (auto pos = name.find(':'); pos != std::string::npos) {
    try {
      a = std::stod(name.substr(pos + 1));
    } catch (const std::exception&) {
      fail(ErrorCode::kInvalidArgument, "bad activation parameter in '" + name + "'");
    }
    name.resize(pos);
  }
  static const std::pair<const char*, ActivationTag> kNames[] = {
      {"relu", ActivationTag::kReLU},         {"leaky_relu", ActivationTag::kLeakyReLU},
      {"sigmoid", ActivationTag::kSigmoid},   {"tanh", ActivationTag::kTanh},
      {"softplus", ActivationTag::kSoftplus}, {"swish", ActivationTag::kSwish},
      {"elu", ActivationTag::kELU},           {"softsign", ActivationTag::kSoftsign},
      {"isru", ActivationTag::kISRU},         {"isrlu", ActivationTag::kISRLU},
  };
  for (const auto& [key, tag] : kNames) {
    if (name == key) return Activation(tag, a);
  }
  fail(ErrorCode::kInvalidArgument, "unknown activation '" + name + "'");
}

ActivationFamily Activation::family() const {
  return (tag_ == ActivationTag::kReLU || tag_ == ActivationTag::kLeakyReLU)
             ? ActivationFamily::kPiecewiseLinear
             : ActivationFamily::kLocallyQuadratic;
}

std::string Activation::name() const {
  switch (tag_) {
    case ActivationTag::kReLU: return "relu";
    case ActivationTag::kLeakyReLU: return "leaky_relu";
    case ActivationTag::kSigmoid: return "sigmoid";
    case ActivationTag::kTanh: return "tanh";
    case ActivationTag::kSoftplus: return "softplus";
    case ActivationTag::kSwish: return "swish";
    case ActivationTag::kELU: return "elu";
    case ActivationTag::kSoftsign: return "softsign";
    case ActivationTag::kISRU: return "isru";
    case ActivationTag::kISRLU: return "isrlu";
  }
  return "?";
}

double Activation::lipschitz() const {
  switch (tag_) {
    case ActivationTag::kSigmoid: return 0.25;
    case ActivationTag::kSwish: return kSwishLipschitz;
    case ActivationTag::kELU: return std::max(1.0, a_);
    default: return 1.0;
  }
}

double Activation::value(double z) const {
  switch (tag_) {
    case ActivationTag::kReLU: return z > 0 ? z : 0.0;
    case ActivationTag::kLeakyReLU: return z > 0 ? z : a_ * z;
    case ActivationTag::kSigmoid: return logistic(z);
    case ActivationTag::kTanh: return std::tanh(z);
    case ActivationTag::kSoftplus: return std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0);
    case ActivationTag::kSwish: return z * logistic(z);
    case ActivationTag::kELU: return z > 0 ? z : a_ * std::expm1(z);
    case ActivationTag::kSoftsign: return z / (1.0 + std::abs(z));
    case ActivationTag::kISRU: return z / std::sqrt(1.0 + a_ * z * z);
    case ActivationTag::kISRLU: return z > 0 ? z : z / std::sqrt(1.0 + a_ * z * z);
  }
  return 0.0;
}

double Activation::deriv(double z) const {
  switch (tag_) {
    case ActivationTag::kReLU: return z > 0 ? 1.0 : 0.0;
    case ActivationTag::kLeakyReLU: return z > 0 ? 1.0 : a_;
    case ActivationTag::kSigmoid: {
      const double s = logistic(z);
      return s * (1.0 - s);
    }
    case ActivationTag::kTanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case ActivationTag::kSoftplus: return logistic(z);
    case ActivationTag::kSwish: {
      const double s = logistic(z);
      return s + z * s * (1.0 - s);
    }
    case ActivationTag::kELU: return z > 0 ? 1.0 : a_ * std::exp(z);
    case ActivationTag::kSoftsign: {
      const double d = 1.0 + std::abs(z);
      return 1.0 / (d * d);
    }
    case ActivationTag::kISRU: return std::pow(1.0 + a_ * z * z, -1.5);
    case ActivationTag::kISRLU: return z > 0 ? 1.0 : std::pow(1.0 + a_ * z * z, -1.5);
  }
  return 0.0;
}

double Activation::deriv2(double z) const {
  switch (tag_) {
    case ActivationTag::kReLU:
    case ActivationTag::kLeakyReLU: return 0.0;
    case ActivationTag::kSigmoid: {
      const double s = logistic(z);
      return s * (1.0 - s) * (1.0 - 2.0 * s);
    }
    case ActivationTag::kTanh: {
      const double t = std::tanh(z);
      return -2.0 * t * (1.0 - t * t);
    }
    case ActivationTag::kSoftplus: {
      const double s = logistic(z);
      return s * (1.0 - s);
    }
    case ActivationTag::kSwish: {
      const double s = logistic(z);
      return s * (1.0 - s) * (2.0 + z * (1.0 - 2.0 * s));
    }
    case ActivationTag::kELU: return z > 0 ? 0.0 : a_ * std::exp(z);
    case ActivationTag::kSoftsign: {
      const double d = 1.0 + std::abs(z);
      return (z > 0 ? -2.0 : 2.0) / (d * d * d);
    }
    case ActivationTag::kISRU: return -3.0 * a_ * z * std::pow(1.0 + a_ * z * z, -2.5);
    case ActivationTag::kISRLU:
      return z > 0 ? 0.0 : -3.0 * a_ * z * std::pow(1.0 + a_ * z * z, -2.5);
  }
  return 0.0;
}

std::optional<double> Activation::expansion_point() const {
  switch (tag_) {
    case ActivationTag::kReLU:
    case ActivationTag::kLeakyReLU: return std::nullopt;
    case ActivationTag::kSigmoid: return 1.0;
    case ActivationTag::kTanh: return 0.5;
    case ActivationTag::kSoftplus: return 0.0;
    case ActivationTag::kSwish: return 0.0;
    case ActivationTag::kELU: return -1.0;
    case ActivationTag::kSoftsign: return 0.5;
    case ActivationTag::kISRU: return 0.5;
    case ActivationTag::kISRLU: return -0.5;
  }
  return std::nullopt;
}

}  // namespace clipnet
