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
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace clipnet {

enum class Task { kRegression, kClassification };

// n samples stored row-wise: inputs is n x d, targets has length n.
// Classification targets are -1 or +1.
struct Dataset {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd targets;
  Task task = Task::kRegression;

  // Provenance: generator id, seed, constants used.
  std::string generator;
  std::uint64_t seed = 0;
  std::map<std::string, double> constants;

  std::size_t size() const { return static_cast<std::size_t>(inputs.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(inputs.cols()); }
  bool empty() const { return inputs.rows() == 0; }

  // Rows selected by index, in the given order.
  Dataset subset(std::span<const std::size_t> rows) const;

  // Checks the invariants: consistent shapes, inputs in [0,1], labels
  // in {-1,+1} for classification.
  void validate() const;
};

// CSV with header x1,...,xd,y.
void write_csv(const Dataset& data, const std::string& path);
// Sidecar JSON {generator, seed, c_m, n, d}.
void write_meta_json(const Dataset& data, const std::string& path);

// Reads a user CSV. Features are min-max scaled per column to [0,1]
// (constant columns become 0.5). For classification the two observed label
// values map to -1/+1 in lexicographic order.
Dataset ingest_csv(const std::string& path, const std::string& label_column, Task task);

}  // namespace clipnet
