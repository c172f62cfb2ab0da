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

// Adaptive observation (p) and feature (q) sampling distributions.
//
// Observations: p_i ∝ (1 - alpha) L_A(i) + alpha L_F(i) with exponential losses
//   L_A(i) = exp(clamp(-y_i E(x_i) / t, -30, 30))            all rows, every step
//   L_F(i) = exp(-(2 z_i - 1)(2 h_F(h(x_i)) - 1))            patch rows only
// Features, for j in the patch:
//   q_j <- (1 - mu) q_j + mu (alpha relu(F)_j / sum relu(F) + (1 - alpha) I_j / sum I)
// then normalize, floor at epsilon and normalize again.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "fairpatch/adversary.hpp"
#include "fairpatch/common.hpp"
#include "fairpatch/rng.hpp"

namespace fairpatch {

/// Index pair (rows R, columns C) naming a sub-table; both sorted ascending.
struct Minipatch {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;

  friend bool operator==(const Minipatch&, const Minipatch&) = default;
};

inline constexpr double kExponentClamp = 30.0;

/// Weighted sampling of k distinct indices without replacement: each index
/// with weight w > 0 gets key u^(1/w), u ~ U(0, 1), and the k largest keys win.
/// One uniform is drawn per index regardless of weight.
inline std::vector<std::size_t> weighted_sample_without_replacement(
    std::span<const double> weights, std::size_t k, Rng& rng) {
  const std::size_t size = weights.size();
  if (k > size) throw SamplingError("cannot draw more indices than exist");
  std::vector<double> log_keys(size);
  std::size_t positive = 0;
  for (std::size_t i = 0; i < size; ++i) {
    const double u = rng.uniform_open();
    if (weights[i] > 0.0) {
      log_keys[i] = std::log(u) / weights[i];
      ++positive;
    } else {
      log_keys[i] = -std::numeric_limits<double>::infinity();
    }
  }
  if (positive < k) throw SamplingError("fewer positive weights than requested draws");
  std::vector<std::size_t> order(size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return log_keys[a] > log_keys[b] || (log_keys[a] == log_keys[b] && a < b);
                    });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

class SamplerState {
 public:
  SamplerState(std::size_t n_rows, std::size_t n_features, double alpha, double mu,
               double epsilon_floor, std::uint64_t seed)
      : alpha_(alpha), mu_(mu), epsilon_(epsilon_floor), rng_(seed) {
    if (n_rows < 1 || n_features < 1) throw ConfigError("sampler needs N, M >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
    if (!(mu > 0.0 && mu < 1.0)) throw ConfigError("mu must lie in (0, 1)");
    if (!(epsilon_floor > 0.0 && epsilon_floor * n_features < 1.0)) {
      throw ConfigError("epsilon_floor must be positive and below 1/M");
    }
    p_.assign(n_rows, 1.0 / static_cast<double>(n_rows));
    q_.assign(n_features, 1.0 / static_cast<double>(n_features));
    loss_acc_.assign(n_rows, 1.0);
    loss_fair_.assign(n_rows, 1.0);
  }

  const std::vector<double>& p() const noexcept { return p_; }
  const std::vector<double>& q() const noexcept { return q_; }
  const std::vector<double>& loss_acc() const noexcept { return loss_acc_; }
  const std::vector<double>& loss_fair() const noexcept { return loss_fair_; }
  double alpha() const noexcept { return alpha_; }
  double mu() const noexcept { return mu_; }
  double epsilon_floor() const noexcept { return epsilon_; }
  std::size_t rows() const noexcept { return p_.size(); }
  std::size_t features() const noexcept { return q_.size(); }

  Minipatch sample_minipatch(std::size_t n, std::size_t m) {
    if (n < 1 || m < 1) throw SamplingError("minipatch needs n, m >= 1");
    Minipatch patch;
    patch.rows = weighted_sample_without_replacement(p_, n, rng_);
    patch.cols = weighted_sample_without_replacement(q_, m, rng_);
    return patch;
  }

  /// `margins` holds E^(t)(x_i) for every row; `h_on_patch` is the current
  /// tree's vote on each patch row, parallel to patch.rows.
  void update_observation_probs(std::span<const double> margins, const Minipatch& patch,
                                const AdversaryModel& adversary, std::span<const int> h_on_patch,
                                std::span<const int> y, std::span<const int> z, std::size_t t) {
    if (t < 1) throw ConfigError("iteration index must be >= 1");
    if (margins.size() != rows() || y.size() != rows() || z.size() != rows()) {
      throw SchemaError("margins, y and z must cover every row");
    }
    if (h_on_patch.size() != patch.rows.size()) {
      throw SchemaError("h outputs must be parallel to patch rows");
    }
    const double steps = static_cast<double>(t);
    for (std::size_t i = 0; i < rows(); ++i) {
      const double exponent =
          std::clamp(-y[i] * margins[i] / steps, -kExponentClamp, kExponentClamp);
      loss_acc_[i] = std::exp(exponent);
    }
    for (std::size_t k = 0; k < patch.rows.size(); ++k) {
      const std::size_t i = patch.rows[k];
      const double adversary_margin = 2.0 * adversary.score(h_on_patch[k]) - 1.0;
      loss_fair_[i] = std::exp(-(2.0 * z[i] - 1.0) * adversary_margin);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < rows(); ++i) {
      p_[i] = (1.0 - alpha_) * loss_acc_[i] + alpha_ * loss_fair_[i];
      total += p_[i];
    }
    for (double& v : p_) v /= total;
  }

  /// Importance vectors are parallel to patch.cols.
  void update_feature_probs(const Minipatch& patch, std::span<const double> tree_importance,
                            std::span<const double> fair_importance) {
    const std::size_t m = patch.cols.size();
    if (tree_importance.size() != m || fair_importance.size() != m) {
      throw SchemaError("importance vectors must be parallel to patch cols");
    }
    double importance_total = 0.0;
    double fair_total = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      importance_total += tree_importance[k];
      fair_total += std::max(0.0, fair_importance[k]);
    }
    for (std::size_t k = 0; k < m; ++k) {
      const double accuracy_term = importance_total > 0.0
                                       ? tree_importance[k] / importance_total
                                       : 1.0 / static_cast<double>(m);
      const double fair_term =
          fair_total > 0.0 ? std::max(0.0, fair_importance[k]) / fair_total : 0.0;
      double& qj = q_[patch.cols[k]];
      qj = (1.0 - mu_) * qj + mu_ * (alpha_ * fair_term + (1.0 - alpha_) * accuracy_term);
    }
    normalize(q_);
    for (double& v : q_) v = std::max(v, epsilon_);
    normalize(q_);
  }

  /// Sum-to-one, nonnegative p, positive q, and the floor bound eps/(1+M eps).
  bool invariants_hold(double tolerance = 1e-9) const {
    const double sum_p = std::accumulate(p_.begin(), p_.end(), 0.0);
    const double sum_q = std::accumulate(q_.begin(), q_.end(), 0.0);
    if (std::abs(sum_p - 1.0) > tolerance || std::abs(sum_q - 1.0) > tolerance) return false;
    const double q_floor = epsilon_ / (1.0 + static_cast<double>(features()) * epsilon_);
    for (double v : p_) {
      if (!(v >= 0.0)) return false;
    }
    for (double v : q_) {
      if (!(v > 0.0) || v < q_floor * (1.0 - 1e-12)) return false;
    }
    for (std::size_t i = 0; i < rows(); ++i) {
      if (!(loss_acc_[i] > 0.0) || !(loss_fair_[i] > 0.0)) return false;
    }
    return true;
  }

 private:
  static void normalize(std::vector<double>& v) {
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    for (double& x : v) x /= total;
  }

  std::vector<double> p_;
  std::vector<double> q_;
  std::vector<double> loss_acc_;
  std::vector<double> loss_fair_;
  double alpha_;
  double mu_;
  double epsilon_;
  Rng rng_;
};

inline SamplerState init_state(std::size_t n_rows, std::size_t n_features, double alpha,
                               double mu, double epsilon_floor, std::uint64_t seed) {
  return SamplerState(n_rows, n_features, alpha, mu, epsilon_floor, seed);
}

inline Minipatch sample_minipatch(SamplerState& state, std::size_t n, std::size_t m) {
  return state.sample_minipatch(n, m);
}

inline void update_observation_probs(SamplerState& state, std::span<const double> margins,
                                     const Minipatch& patch, const AdversaryModel& adversary,
                                     std::span<const int> h_on_patch, std::span<const int> y,
                                     std::span<const int> z, std::size_t t) {
  state.update_observation_probs(margins, patch, adversary, h_on_patch, y, z, t);
}

inline void update_feature_probs(SamplerState& state, const Minipatch& patch,
                                 std::span<const double> tree_importance,
                                 std::span<const double> fair_importance) {
  state.update_feature_probs(patch, tree_importance, fair_importance);
}

}  // namespace fairpatch
