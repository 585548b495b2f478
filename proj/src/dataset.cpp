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

#include "clipnet/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "clipnet/error.hpp"
#include "text_util.hpp"

namespace clipnet {

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.inputs.resize(static_cast<Eigen::Index>(rows.size()), inputs.cols());
  out.targets.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < size(), "row index out of range");
    out.inputs.row(i) = inputs.row(rows[i]);
    out.targets(i) = targets(rows[i]);
  }
  out.task = task;
  out.generator = generator;
  out.seed = seed;
  out.constants = constants;
  return out;
}

void Dataset::validate() const {
  require(inputs.rows() >= 1, "dataset is empty");
  if (targets.size() != inputs.rows()) {
    fail(ErrorCode::kShapeMismatch, "dataset has " + std::to_string(inputs.rows()) +
                                        " inputs but " + std::to_string(targets.size()) +
                                        " targets");
  }
  require(inputs.minCoeff() >= 0.0 && inputs.maxCoeff() <= 1.0, "inputs must lie in [0,1]");
  if (task == Task::kClassification) {
    for (Eigen::Index i = 0; i < targets.size(); ++i) {
      require(targets(i) == 1.0 || targets(i) == -1.0,
              "classification labels must be -1 or +1 (row " + std::to_string(i) + ")");
    }
  }
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  for (std::size_t j = 0; j < data.dim(); ++j) out << 'x' << (j + 1) << ',';
  out << "y\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.dim(); ++j) out << detail::format_double(data.inputs(i, j)) << ',';
    out << detail::format_double(data.targets(i)) << '\n';
  }
  if (!out) fail(ErrorCode::kIo, "write to '" + path + "' failed");
}

void write_meta_json(const Dataset& data, const std::string& path) {
  nlohmann::json meta;
  meta["generator"] = data.generator;
  meta["seed"] = data.seed;
  if (auto it = data.constants.find("c_m"); it != data.constants.end()) {
    meta["c_m"] = it->second;
  } else {
    meta["c_m"] = nullptr;
  }
  meta["n"] = data.size();
  meta["d"] = data.dim();
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out << meta.dump(2) << '\n';
}

Dataset ingest_csv(const std::string& path, const std::string& label_column, Task task) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::kIo, "'" + path + "' is empty");
  std::vector<std::string> header = detail::split_csv(line);
  for (auto& h : header) h = detail::trim(h);
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) {
    fail(ErrorCode::kInvalidArgument, "label column '" + label_column + "' not found in " + path);
  }
  const std::size_t label_idx = static_cast<std::size_t>(label_it - header.begin());
  const std::size_t d = header.size() - 1;
  require(d >= 1, "CSV needs at least one feature column");

  std::vector<std::vector<double>> features;
  std::vector<std::string> labels;
  std::vector<std::string> missing, bad;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    if (fields.size() != header.size()) {
      fail(ErrorCode::kInvalidArgument, path + ":" + std::to_string(line_no) + ": expected " +
                                            std::to_string(header.size()) + " fields, got " +
                                            std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(d);
    bool row_missing = false;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const std::string f = detail::trim(fields[j]);
      if (f.empty() || f == "NA" || f == "?" || f == "nan" || f == "NaN") {
        row_missing = true;
        continue;
      }
      if (j == label_idx) continue;
      auto v = detail::parse_double(f);
      if (!v) {
        bad.push_back(std::to_string(line_no) + " (" + header[j] + "='" + f + "')");
        continue;
      }
      row.push_back(*v);
    }
    if (row_missing) missing.push_back(std::to_string(line_no));
    features.push_back(std::move(row));
    labels.push_back(detail::trim(fields[label_idx]));
  }
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size() && i < 20; ++i) s += (i ? ", " : "") + v[i];
    if (v.size() > 20) s += ", ...";
    return s;
  };
  if (!missing.empty()) fail(ErrorCode::kInvalidArgument, "missing values in " + path + " at lines " + join(missing));
  if (!bad.empty()) fail(ErrorCode::kInvalidArgument, "non-numeric feature in " + path + " at lines " + join(bad));
  require(!features.empty(), "'" + path + "' has no data rows");

  const std::size_t n = features.size();
  Dataset data;
  data.inputs.resize(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) data.inputs(i, j) = features[i][j];
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double lo = data.inputs.col(j).minCoeff();
    const double hi = data.inputs.col(j).maxCoeff();
    if (hi > lo) {
      data.inputs.col(j) = (data.inputs.col(j).array() - lo) / (hi - lo);
    } else {
      data.inputs.col(j).setConstant(0.5);
    }
  }

  data.targets.resize(n);
  data.task = task;
  data.generator = "csv:" + path;
  if (task == Task::kClassification) {
    const std::set<std::string> classes(labels.begin(), labels.end());
    if (classes.size() != 2) {
      fail(ErrorCode::kInvalidArgument, "classification needs exactly 2 label values, found " +
                                            std::to_string(classes.size()));
    }
    const std::string& negative = *classes.begin();
    for (std::size_t i = 0; i < n; ++i) data.targets(i) = labels[i] == negative ? -1.0 : 1.0;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      auto v = detail::parse_double(labels[i]);
      if (!v) fail(ErrorCode::kInvalidArgument, "non-numeric regression label '" + labels[i] + "'");
      data.targets(i) = *v;
    }
  }
  return data;
}

}  // namespace clipnet
