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

#include <string>
#include <string_view>

namespace clipnet {

enum class LossKind { kSquare, kLogistic, kExponential };

LossKind parse_loss(std::string_view name);
std::string loss_name(LossKind kind);
bool is_margin_loss(LossKind kind);

// Exponential loss values and derivatives saturate at this magnitude.
inline constexpr double kLossCeiling = 1e300;

// Square: (y-f)^2. Logistic: log(1+exp(-yf)). Exponential: exp(-yf).
// Margin losses require y in {-1,+1}. `clamped` is set when the exponential
// loss hit kLossCeiling.
double loss_value(LossKind kind, double y, double f, bool* clamped = nullptr);

// d/df of loss_value.
double loss_deriv(LossKind kind, double y, double f);

// Throws unless y is a valid label for the loss.
void check_label(LossKind kind, double y);

}  // namespace clipnet
