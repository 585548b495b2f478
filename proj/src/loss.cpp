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

#include "clipnet/loss.hpp"

#include <cmath>

#include "clipnet/error.hpp"

namespace clipnet {
namespace {

const double kLogCeiling = std::log(kLossCeiling);

// log(1 + exp(-m)) without overflow.
double softplus_neg(double m) {
  return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

// 1 / (1 + exp(m)).
double logistic_neg(double m) {
  if (m >= 0) {
    const double e = std::exp(-m);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(m));
}

}  // namespace

LossKind parse_loss(std::string_view name) {
  if (name == "square") return LossKind::kSquare;
  if (name == "logistic") return LossKind::kLogistic;
  if (name == "exponential") return LossKind::kExponential;
  fail(ErrorCode::kInvalidArgument, "unknown loss '" + std::string(name) + "'");
}

std::string loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::kSquare: return "square";
    case LossKind::kLogistic: return "logistic";
    case LossKind::kExponential: return "exponential";
  }
  return "?";
}

bool is_margin_loss(LossKind kind) { return kind != LossKind::kSquare; }

void check_label(LossKind kind, double y) {
  if (is_margin_loss(kind) && y != 1.0 && y != -1.0) {
    fail(ErrorCode::kInvalidArgument,
         loss_name(kind) + " loss needs labels in {-1,+1}, got " + std::to_string(y));
  }
}

double loss_value(LossKind kind, double y, double f, bool* clamped) {
  check_label(kind, y);
  if (clamped) *clamped = false;
  switch (kind) {
    case LossKind::kSquare: {
      const double r = y - f;
      return r * r;
    }
    case LossKind::kLogistic: return softplus_neg(y * f);
    case LossKind::kExponential: {
      const double e = -y * f;
      if (e > kLogCeiling) {
        if (clamped) *clamped = true;
        return kLossCeiling;
      }
      return std::exp(e);
    }
  }
  return 0.0;
}

double loss_deriv(LossKind kind, double y, double f) {
  check_label(kind, y);
  switch (kind) {
    case LossKind::kSquare: return -2.0 * (y - f);
    case LossKind::kLogistic: return -y * logistic_neg(y * f);
    case LossKind::kExponential: {
      const double e = -y * f;
      return -y * (e > kLogCeiling ? kLossCeiling : std::exp(e));
    }
  }
  return 0.0;
}

}  // namespace clipnet
