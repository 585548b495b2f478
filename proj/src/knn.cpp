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

#include "clipnet/knn.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>

#include "clipnet/error.hpp"

namespace clipnet {

KnnModel::KnnModel(const Dataset& data, std::size_t k, Task task)
    : inputs_(data.inputs), targets_(data.targets), k_(k), task_(task) {
  if (k < 1 || k > data.size()) {
    fail(ErrorCode::kInvalidArgument, "k must lie in [1, " + std::to_string(data.size()) +
                                          "], got " + std::to_string(k));
  }
}

std::vector<std::size_t> KnnModel::neighbors(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(inputs_.cols())) {
    fail(ErrorCode::kShapeMismatch, "query has dimension " + std::to_string(x.size()) +
                                        ", expected " + std::to_string(inputs_.cols()));
  }
  const Eigen::Map<const Eigen::RowVectorXd> q(x.data(), static_cast<Eigen::Index>(x.size()));
  std::vector<std::pair<double, std::size_t>> dist(size());
  for (std::size_t i = 0; i < size(); ++i) {
    dist[i] = {(inputs_.row(i) - q).squaredNorm(), i};
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end());
  std::vector<std::size_t> out(k_);
  for (std::size_t i = 0; i < k_; ++i) out[i] = dist[i].second;
  return out;
}

double KnnModel::predict(std::span<const double> x) const {
  double sum = 0.0;
  for (std::size_t i : neighbors(x)) sum += targets_(i);
  const double mean = sum / static_cast<double>(k_);
  if (task_ == Task::kClassification) return mean >= 0.0 ? 1.0 : -1.0;
  return mean;
}

Eigen::VectorXd KnnModel::predict(const Eigen::MatrixXd& xs) const {
  Eigen::VectorXd out(xs.rows());
  Eigen::VectorXd row(xs.cols());
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    row = xs.row(i).transpose();
    out(i) = predict(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
  }
  return out;
}

KnnModel knn_fit(const Dataset& data, std::size_t k, Task task) { return KnnModel(data, k, task); }

}  // namespace clipnet
