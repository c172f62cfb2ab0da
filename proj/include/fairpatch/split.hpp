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

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fairpatch/common.hpp"
#include "fairpatch/dataset.hpp"
#include "fairpatch/rng.hpp"

namespace fairpatch {

struct TrainTestSplit {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  bool stratified = true;
  Warnings warnings;
};

/// Row partition stratified jointly on (y, z). Each of the four cells sends
/// round(test_fraction * |cell|) rows to the test side. Falls back to an
/// unstratified split when a cell has fewer than 2 rows.
inline TrainTestSplit train_test_split(const Dataset& data, double test_fraction,
                                       std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
  Rng rng(derive_seed(seed, "train_test_split"));
  std::array<std::vector<std::size_t>, 4> cells;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const int cell = (data.labels()[i] > 0 ? 2 : 0) + data.protected_attribute()[i];
    cells[cell].push_back(i);
  }

  Warnings warnings;
  bool stratified = true;
  for (const auto& cell : cells) {
    if (cell.size() < 2) stratified = false;
  }
  if (!stratified) {
    warnings.push_back("a (y, z) cell has fewer than 2 rows; split is unstratified");
    std::vector<std::size_t> all(data.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    cells = {std::move(all), {}, {}, {}};
  }

  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  for (auto& cell : cells) {
    if (cell.empty()) continue;
    rng.shuffle(cell);
    auto take = static_cast<std::size_t>(std::llround(test_fraction * cell.size()));
    take = std::min(take, cell.size());
    test_rows.insert(test_rows.end(), cell.begin(), cell.begin() + take);
    train_rows.insert(train_rows.end(), cell.begin() + take, cell.end());
  }
  if (test_rows.size() < 2 || train_rows.size() < 2) {
    throw DataError("split leaves fewer than 2 rows on one side");
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {data.subset(train_rows), data.subset(test_rows), std::move(train_rows),
          std::move(test_rows), stratified, std::move(warnings)};
}

}  // namespace fairpatch
