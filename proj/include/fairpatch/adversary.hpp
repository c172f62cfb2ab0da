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

#include <cstddef>
#include <span>

#include "fairpatch/common.hpp"

namespace fairpatch {

/// Adversary that guesses the protected attribute from a weak learner's vote.
/// Its only input is h(x) in {-1, +1}, so a two-cell table of smoothed
/// conditional frequencies P(z = 1 | h = v) is the most it can learn.
struct AdversaryModel {
  double score_if_positive = 0.5;  // P(z=1 | h=+1)
  double score_if_negative = 0.5;  // P(z=1 | h=-1)

  double score(int h_output) const noexcept {
    return h_output > 0 ? score_if_positive : score_if_negative;
  }
};

/// Add-one smoothed fit: score(v) = (#{z=1, h=v} + 1) / (#{h=v} + 2).
inline AdversaryModel fit_adversary(std::span<const int> h_outputs, std::span<const int> z) {
  if (h_outputs.size() != z.size()) throw SchemaError("h_outputs and z differ in length");
  if (h_outputs.empty()) throw DataError("adversary needs at least one sample");
  std::size_t total[2] = {0, 0};
  std::size_t protected_count[2] = {0, 0};
  for (std::size_t i = 0; i < z.size(); ++i) {
    const int cell = h_outputs[i] > 0 ? 1 : 0;
    ++total[cell];
    if (z[i] != 0) ++protected_count[cell];
  }
  const auto smoothed = [&](int cell) {
    return (static_cast<double>(protected_count[cell]) + 1.0) /
           (static_cast<double>(total[cell]) + 2.0);
  };
  return {smoothed(1), smoothed(0)};
}

inline double adversary_score(const AdversaryModel& model, int h_output) {
  return model.score(h_output);
}

}  // namespace fairpatch
