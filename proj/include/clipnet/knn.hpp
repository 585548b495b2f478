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
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "clipnet/dataset.hpp"

namespace clipnet {

// Exact brute-force k-nearest-neighbours under Euclidean distance. Ties in
// distance go to the lower training index.
class KnnModel {
 public:
  KnnModel(const Dataset& data, std::size_t k, Task task);

  std::size_t k() const { return k_; }
  Task task() const { return task_; }
  std::size_t size() const { return static_cast<std::size_t>(inputs_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(inputs_.cols()); }

  // Mean target (regression) or sign of the mean label with ties -> +1.
  double predict(std::span<const double> x) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& xs) const;

  // Indices of the k nearest training rows, nearest first.
  std::vector<std::size_t> neighbors(std::span<const double> x) const;

 private:
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  std::size_t k_;
  Task task_;
};

KnnModel knn_fit(const Dataset& data, std::size_t k, Task task);

}  // namespace clipnet
