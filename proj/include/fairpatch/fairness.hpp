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
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>

#include "fairpatch/common.hpp"

namespace fairpatch {

/// Positive-prediction rate per protected group. A rate is empty when its
/// group has no members.
struct GroupRates {
  std::optional<double> positive_rate_z1;
  std::optional<double> positive_rate_z0;
  std::size_t count_z1 = 0;
  std::size_t count_z0 = 0;

  bool defined() const { return positive_rate_z1.has_value() && positive_rate_z0.has_value(); }

  /// |P(yhat=+1 | z=1) - P(yhat=+1 | z=0)|; 0 when a group is empty.
  double dp_gap() const {
    return defined() ? std::abs(*positive_rate_z1 - *positive_rate_z0) : 0.0;
  }

  /// min(rates) / max(rates), 1 when both rates are 0 or a group is empty.
  double dp_ratio() const {
    if (!defined()) return 1.0;
    const double hi = std::max(*positive_rate_z1, *positive_rate_z0);
    const double lo = std::min(*positive_rate_z1, *positive_rate_z0);
    return hi > 0.0 ? lo / hi : 1.0;
  }
};

inline GroupRates group_rates(std::span<const int> predictions, std::span<const int> z) {
  if (predictions.size() != z.size()) throw SchemaError("predictions and z differ in length");
  if (predictions.empty()) throw DataError("group_rates needs at least one sample");
  std::size_t pos[2] = {0, 0};
  std::size_t count[2] = {0, 0};
  for (std::size_t i = 0; i < z.size(); ++i) {
    const int g = z[i] != 0 ? 1 : 0;
    ++count[g];
    if (predictions[i] > 0) ++pos[g];
  }
  GroupRates rates;
  rates.count_z0 = count[0];
  rates.count_z1 = count[1];
  if (count[1] > 0) rates.positive_rate_z1 = static_cast<double>(pos[1]) / count[1];
  if (count[0] > 0) rates.positive_rate_z0 = static_cast<double>(pos[0]) / count[0];
  return rates;
}

inline double dp_gap(std::span<const int> predictions, std::span<const int> z) {
  return group_rates(predictions, z).dp_gap();
}

}  // namespace fairpatch
