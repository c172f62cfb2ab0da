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

// Synthetic data with four feature groups:
//   G1  shifted by z, drives y      (biased signal)
//   G2  shifted by z, no direct y   (biased noise)
//   G3  independent of z, drives y  (fair signal)
//   G4  independent of z, no y      (noise)
// x_ij = alpha_j z_i + sqrt(rho) c_ig + sqrt(1 - rho) e_ij, with c_ig a common
// factor per (row, group) so that rho is the within-group correlation.
// y_i ~ Bernoulli(sigmoid(beta0 + sum_j beta_j sin(x_ij))), mapped to +/-1.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairpatch/common.hpp"
#include "fairpatch/dataset.hpp"
#include "fairpatch/rng.hpp"

namespace fairpatch {

struct SimulationConfig {
  std::size_t n_samples = 2000;
  std::array<std::size_t, 4> group_sizes{10, 10, 10, 10};
  double pi = 0.2;
  double alpha_signal = 2.0;
  double beta_coef = 1.0;
  double beta0 = 0.0;
  double within_group_correlation = 0.5;
  std::uint64_t seed = 42;

  std::size_t num_features() const {
    return group_sizes[0] + group_sizes[1] + group_sizes[2] + group_sizes[3];
  }

  void validate() const {
    if (n_samples < 2) throw ConfigError("n_samples must be at least 2");
    for (std::size_t g : group_sizes) {
      if (g == 0) throw ConfigError("group_sizes must be positive");
    }
    if (!(pi > 0.0 && pi < 1.0)) throw ConfigError("pi must lie in (0, 1)");
    if (!std::isfinite(alpha_signal) || !std::isfinite(beta_coef) || !std::isfinite(beta0)) {
      throw ConfigError("alpha_signal, beta_coef and beta0 must be finite");
    }
    if (!(within_group_correlation >= 0.0 && within_group_correlation < 1.0)) {
      throw ConfigError("within_group_correlation must lie in [0, 1)");
    }
  }
};

/// Half-open column range [begin, end) of one feature group.
struct GroupRange {
  std::string name;
  std::size_t begin = 0;
  std::size_t end = 0;
};

inline std::vector<GroupRange> group_ranges(const SimulationConfig& config) {
  std::vector<GroupRange> out;
  std::size_t offset = 0;
  for (std::size_t g = 0; g < 4; ++g) {
    out.push_back({"G" + std::to_string(g + 1), offset, offset + config.group_sizes[g]});
    offset += config.group_sizes[g];
  }
  return out;
}

inline Dataset simulate(const SimulationConfig& config) {
  config.validate();
  const std::size_t n = config.n_samples;
  const std::size_t m = config.num_features();
  const auto groups = group_ranges(config);
  const double shared = std::sqrt(config.within_group_correlation);
  const double own = std::sqrt(1.0 - config.within_group_correlation);

  Rng rng(derive_seed(config.seed, "simulate"));
  Matrix x(n, m);
  std::vector<int> y(n);
  std::vector<int> z(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = rng.bernoulli(config.pi) ? 1 : 0;
    double f = config.beta0;
    for (std::size_t g = 0; g < 4; ++g) {
      const bool shifted = g == 0 || g == 1;
      const bool signal = g == 0 || g == 2;
      const double mean = shifted ? config.alpha_signal * z[i] : 0.0;
      const double common = rng.normal();
      for (std::size_t j = groups[g].begin; j < groups[g].end; ++j) {
        x(i, j) = mean + shared * common + own * rng.normal();
        if (signal) f += config.beta_coef * std::sin(x(i, j));
      }
    }
    const double prob = 1.0 / (1.0 + std::exp(-f));
    y[i] = rng.bernoulli(prob) ? 1 : -1;
  }

  std::vector<std::string> names(m);
  for (std::size_t j = 0; j < m; ++j) names[j] = "f_" + std::to_string(j);
  return Dataset(std::move(x), std::move(y), std::move(z), std::move(names));
}

inline void to_json(nlohmann::json& j, const SimulationConfig& c) {
  j = nlohmann::json{{"schema_version", kSchemaVersion},
                     {"n_samples", c.n_samples},
                     {"group_sizes", c.group_sizes},
                     {"pi", c.pi},
                     {"alpha_signal", c.alpha_signal},
                     {"beta_coef", c.beta_coef},
                     {"beta0", c.beta0},
                     {"within_group_correlation", c.within_group_correlation},
                     {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, SimulationConfig& c) {
  const SimulationConfig defaults;
  c.n_samples = j.value("n_samples", defaults.n_samples);
  c.group_sizes = j.value("group_sizes", defaults.group_sizes);
  c.pi = j.value("pi", defaults.pi);
  c.alpha_signal = j.value("alpha_signal", defaults.alpha_signal);
  c.beta_coef = j.value("beta_coef", defaults.beta_coef);
  c.beta0 = j.value("beta0", defaults.beta0);
  c.within_group_correlation =
      j.value("within_group_correlation", defaults.within_group_correlation);
  c.seed = j.value("seed", defaults.seed);
}

inline void to_json(nlohmann::json& j, const GroupRange& g) {
  j = nlohmann::json{{"name", g.name}, {"begin", g.begin}, {"end", g.end}};
}

}  // namespace fairpatch
