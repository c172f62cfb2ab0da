// Copyright 2026 The fairpatch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small fixtures shared by the unit tests.

#pragma once

#include <string>
#include <vector>

#include "fairpatch/fairpatch.hpp"

namespace fairpatch::testing {

inline Matrix matrix(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  std::vector<double> values;
  for (const auto& r : rows) values.insert(values.end(), r.begin(), r.end());
  return Matrix(rows.size(), cols, std::move(values));
}

inline std::vector<std::string> names(std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < count; ++j) out.push_back("f_" + std::to_string(j));
  return out;
}

/// Random dataset with a weak linear signal on the first feature.
inline Dataset random_dataset(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(rows, cols);
  std::vector<int> y(rows);
  std::vector<int> z(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) x(i, j) = rng.normal();
    y[i] = x(i, 0) + 0.5 * rng.normal() > 0.0 ? 1 : -1;
    z[i] = rng.bernoulli(0.4) ? 1 : 0;
  }
  y[0] = 1;
  y[1] = -1;
  z[0] = 1;
  z[1] = 0;
  return Dataset(std::move(x), std::move(y), std::move(z), names(cols));
}

/// Single-leaf tree voting `vote` everywhere.
inline DecisionTree constant_tree(int vote) {
  TreeNode leaf;
  leaf.prediction = vote;
  return DecisionTree({leaf}, {0});
}

}  // namespace fairpatch::testing
