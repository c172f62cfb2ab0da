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

// Fair minipatch boosting. Each iteration:
//   1. draw a minipatch (rows by p, columns by q)
//   2. fit a shallow tree on it
//   3. add its +/-1 vote to E for every row, and to G for rows outside the patch
//   4. fit the adversary on the patch and update p
//   5. score the tree's features (MDI and fairness) and update q
//   6. record out-of-patch accuracy and test the early-stopping rule

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairpatch/adversary.hpp"
#include "fairpatch/common.hpp"
#include "fairpatch/dataset.hpp"
#include "fairpatch/rng.hpp"
#include "fairpatch/sampling.hpp"
#include "fairpatch/tree.hpp"

namespace fairpatch {

struct TrainConfig {
  double alpha = 0.5;
  double mu = 0.2;
  std::optional<std::size_t> n_override;
  std::optional<std::size_t> m_override;
  std::size_t max_iterations = 500;
  std::size_t burn_in = 20;
  std::size_t patience_window = 50;
  double stop_margin = 0.001;
  double epsilon_floor = 1e-4;
  bool truncate_at_best = true;
  TreeConfig tree;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
    if (!(mu > 0.0 && mu < 1.0)) throw ConfigError("mu must lie in (0, 1)");
    if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
    if (patience_window < 1) throw ConfigError("patience_window must be at least 1");
    if (!(stop_margin >= 0.0)) throw ConfigError("stop_margin must be nonnegative");
    if (!(epsilon_floor > 0.0)) throw ConfigError("epsilon_floor must be positive");
    if (n_override && *n_override < 1) throw ConfigError("n_override must be positive");
    if (m_override && *m_override < 1) throw ConfigError("m_override must be positive");
    tree.validate();
  }
};

/// Default minipatch size: ceil(sqrt(count)).
inline std::size_t default_patch_size(std::size_t count) {
  auto size = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(count))));
  while (size * size < count) ++size;
  while (size > 1 && (size - 1) * (size - 1) >= count) --size;
  return size;
}

/// Unweighted sum of tree votes.
struct Ensemble {
  std::vector<DecisionTree> trees;

  std::size_t iteration_count() const noexcept { return trees.size(); }
};

inline double decision_value(const Ensemble& ensemble, std::span<const double> row) {
  double total = 0.0;
  for (const auto& tree : ensemble.trees) total += tree.predict(row);
  return total;
}

inline int predict(const Ensemble& ensemble, std::span<const double> row) {
  return sign_of(decision_value(ensemble, row));
}

inline std::vector<int> predict_all(const Ensemble& ensemble, const Dataset& data) {
  std::vector<int> out(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) out[i] = predict(ensemble, data.row(i));
  return out;
}

/// Out-of-patch margin G and accuracy trace.
struct OopTracker {
  std::vector<double> g_margins;
  std::vector<double> oop_trace;
  double best_oop = -1.0;
  std::size_t best_iteration = 0;  // 1-based; 0 before the first record

  explicit OopTracker(std::size_t n_rows = 0) : g_margins(n_rows, 0.0) {}

  void push(double oop) {
    oop_trace.push_back(oop);
    if (oop > best_oop) {
      best_oop = oop;
      best_iteration = oop_trace.size();
    }
  }
};

/// Fraction of rows outside the patch whose G sign matches y (sign(0) = +1).
/// Empty when the patch covers every row.
inline std::optional<double> oop_accuracy(const OopTracker& tracker, const Minipatch& patch,
                                          std::span<const int> y) {
  std::vector<char> inside(y.size(), 0);
  for (std::size_t i : patch.rows) inside[i] = 1;
  std::size_t total = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (inside[i]) continue;
    ++total;
    if (sign_of(tracker.g_margins[i]) == y[i]) ++correct;
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(total);
}

enum class StopDecision { kContinue, kStop };

/// With W = patience_window, stop at iteration t once t > burn_in + W and the
/// best oop inside the last W iterations fails to beat the best oop before that
/// window by stop_margin.
inline StopDecision early_stop_check(const OopTracker& tracker, std::size_t t,
                                     const TrainConfig& config) {
  const std::size_t window = config.patience_window;
  if (t <= config.burn_in + window || t > tracker.oop_trace.size()) {
    return StopDecision::kContinue;
  }
  const auto begin = tracker.oop_trace.begin();
  const double before = *std::max_element(begin, begin + static_cast<std::ptrdiff_t>(t - window));
  const double recent = *std::max_element(begin + static_cast<std::ptrdiff_t>(t - window),
                                          begin + static_cast<std::ptrdiff_t>(t));
  return recent < before + config.stop_margin ? StopDecision::kStop : StopDecision::kContinue;
}

struct ImportanceReport {
  std::vector<double> feature_probabilities;      // q averaged over (burn_in, T]
  std::vector<double> observation_probabilities;  // p averaged over (burn_in, T]
  std::vector<double> ensemble_tree_fis;          // per-tree MDI averaged over trees
  std::vector<double> ensemble_fair_fis;          // per-tree fairness score averaged over trees
  std::size_t averaged_iterations = 0;
};

struct IterationRecord {
  std::size_t t = 0;
  double oop = 0.0;
  Minipatch patch;
};

/// Per-tree importances scattered to global feature indices.
struct TreeImportance {
  std::vector<double> tree_fis;
  std::vector<double> fair_fis;
};

struct TrainResult {
  Ensemble ensemble;
  OopTracker tracker;
  ImportanceReport report;
  SamplerState state;
  std::vector<IterationRecord> records;
  std::vector<TreeImportance> tree_importance;  // one per fitted tree
  std::vector<double> train_margins;            // E after the last iteration
  std::size_t iterations_run = 0;
  std::size_t patch_rows = 0;
  std::size_t patch_cols = 0;
  Warnings warnings;
};

/// Called after every iteration with the iteration record and updated sampler.
using IterationObserver = std::function<void(const IterationRecord&, const SamplerState&)>;

inline TrainResult train(const Dataset& data, const TrainConfig& config,
                         const IterationObserver& observer = {}) {
  config.validate();
  const std::size_t n_rows = data.rows();
  const std::size_t n_features = data.cols();
  const std::size_t n = config.n_override.value_or(default_patch_size(n_rows));
  const std::size_t m = config.m_override.value_or(default_patch_size(n_features));
  if (n > n_rows) throw ConfigError("minipatch rows exceed dataset rows");
  if (m > n_features) throw ConfigError("minipatch columns exceed dataset features");
  if (n < 2 * static_cast<std::size_t>(config.tree.min_samples_leaf)) {
    throw ConfigError("minipatch rows below 2 * min_samples_leaf");
  }
  if (config.epsilon_floor * static_cast<double>(n_features) >= 1.0) {
    throw ConfigError("epsilon_floor must be below 1/M");
  }

  const auto& y = data.labels();
  const auto& z = data.protected_attribute();
  Warnings warnings;
  const auto single = [](const std::vector<int>& v) {
    return std::all_of(v.begin(), v.end(), [&](int x) { return x == v.front(); });
  };
  if (single(y)) warnings.push_back("labels have a single class; fairness terms are inert");
  if (single(z)) {
    warnings.push_back("protected attribute has a single group; fairness terms are inert");
  }

  SamplerState state(n_rows, n_features, config.alpha, config.mu, config.epsilon_floor,
                     derive_seed(config.seed, "sampler"));
  OopTracker tracker(n_rows);
  std::vector<double> margins(n_rows, 0.0);
  std::vector<double> sum_p(n_rows, 0.0);
  std::vector<double> sum_q(n_features, 0.0);
  std::size_t averaged = 0;
  double fallback_oop = 0.0;
  bool warned_full_patch = false;

  Ensemble ensemble;
  std::vector<TreeImportance> importances;
  std::vector<IterationRecord> records;
  std::vector<char> inside(n_rows, 0);
  std::vector<int> y_patch(n);
  std::vector<int> z_patch(n);
  std::vector<int> h_patch(n);

  std::size_t t = 0;
  while (t < config.max_iterations) {
    ++t;
    Minipatch patch = state.sample_minipatch(n, m);
    const Matrix x_patch = data.features().select(patch.rows, patch.cols);
    for (std::size_t k = 0; k < n; ++k) {
      y_patch[k] = y[patch.rows[k]];
      z_patch[k] = z[patch.rows[k]];
    }
    DecisionTree tree = fit_tree(x_patch, y_patch, config.tree, patch.cols);

    for (std::size_t i : patch.rows) inside[i] = 1;
    for (std::size_t i = 0; i < n_rows; ++i) {
      const int vote = tree.predict(data.row(i));
      margins[i] += vote;
      if (!inside[i]) tracker.g_margins[i] += vote;
    }
    for (std::size_t i : patch.rows) inside[i] = 0;

    for (std::size_t k = 0; k < n; ++k) h_patch[k] = tree.predict_local(x_patch.row(k));
    const AdversaryModel adversary = fit_adversary(h_patch, z_patch);
    state.update_observation_probs(margins, patch, adversary, h_patch, y, z, t);

    const auto local_fis = tree_fis(tree, x_patch, y_patch);
    const auto local_fair = fair_tree_fis(tree, x_patch, y_patch, z_patch);
    state.update_feature_probs(patch, local_fis, local_fair);

    TreeImportance scattered{std::vector<double>(n_features, 0.0),
                             std::vector<double>(n_features, 0.0)};
    for (std::size_t k = 0; k < m; ++k) {
      scattered.tree_fis[patch.cols[k]] = local_fis[k];
      scattered.fair_fis[patch.cols[k]] = local_fair[k];
    }
    importances.push_back(std::move(scattered));
    ensemble.trees.push_back(std::move(tree));

    double oop = fallback_oop;
    if (auto value = oop_accuracy(tracker, patch, y)) {
      oop = *value;
    } else if (!warned_full_patch) {
      warnings.push_back("minipatch covers every row; out-of-patch accuracy is undefined");
      warned_full_patch = true;
    }
    fallback_oop = oop;
    tracker.push(oop);

    if (t > config.burn_in) {
      for (std::size_t i = 0; i < n_rows; ++i) sum_p[i] += state.p()[i];
      for (std::size_t j = 0; j < n_features; ++j) sum_q[j] += state.q()[j];
      ++averaged;
    }
    records.push_back({t, oop, std::move(patch)});
    if (observer) observer(records.back(), state);
    if (early_stop_check(tracker, t, config) == StopDecision::kStop) break;
  }

  ImportanceReport report;
  if (averaged > 0) {
    report.feature_probabilities = sum_q;
    report.observation_probabilities = sum_p;
    for (double& v : report.feature_probabilities) v /= static_cast<double>(averaged);
    for (double& v : report.observation_probabilities) v /= static_cast<double>(averaged);
  } else {
    warnings.push_back("training stopped within burn-in; reporting final probabilities");
    report.feature_probabilities = state.q();
    report.observation_probabilities = state.p();
  }
  report.averaged_iterations = averaged;

  TrainResult result{std::move(ensemble), std::move(tracker), std::move(report),
                     std::move(state),    std::move(records), std::move(importances),
                     std::move(margins),  t,                  n,
                     m,                   std::move(warnings)};
  if (config.truncate_at_best && result.tracker.best_iteration > 0) {
    result.ensemble.trees.resize(result.tracker.best_iteration);
  }
  const std::size_t kept = result.ensemble.trees.size();
  result.report.ensemble_tree_fis.assign(n_features, 0.0);
  result.report.ensemble_fair_fis.assign(n_features, 0.0);
  for (std::size_t k = 0; k < kept; ++k) {
    for (std::size_t j = 0; j < n_features; ++j) {
      result.report.ensemble_tree_fis[j] += result.tree_importance[k].tree_fis[j] / kept;
      result.report.ensemble_fair_fis[j] += result.tree_importance[k].fair_fis[j] / kept;
    }
  }
  return result;
}

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"schema_version", kSchemaVersion},
                     {"alpha", c.alpha},
                     {"mu", c.mu},
                     {"n_override", nullptr},
                     {"m_override", nullptr},
                     {"max_iterations", c.max_iterations},
                     {"burn_in", c.burn_in},
                     {"patience_window", c.patience_window},
                     {"stop_margin", c.stop_margin},
                     {"epsilon_floor", c.epsilon_floor},
                     {"truncate_at_best", c.truncate_at_best},
                     {"tree", c.tree},
                     {"seed", c.seed}};
  if (c.n_override) j["n_override"] = *c.n_override;
  if (c.m_override) j["m_override"] = *c.m_override;
}

inline void from_json(const nlohmann::json& j, TrainConfig& c) {
  const TrainConfig d;
  c.alpha = j.value("alpha", d.alpha);
  c.mu = j.value("mu", d.mu);
  const auto optional_count = [&](const char* key) -> std::optional<std::size_t> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::size_t>();
  };
  c.n_override = optional_count("n_override");
  c.m_override = optional_count("m_override");
  c.max_iterations = j.value("max_iterations", d.max_iterations);
  c.burn_in = j.value("burn_in", d.burn_in);
  c.patience_window = j.value("patience_window", d.patience_window);
  c.stop_margin = j.value("stop_margin", d.stop_margin);
  c.epsilon_floor = j.value("epsilon_floor", d.epsilon_floor);
  c.truncate_at_best = j.value("truncate_at_best", d.truncate_at_best);
  c.tree = j.contains("tree") ? j.at("tree").get<TreeConfig>() : d.tree;
  c.seed = j.value("seed", d.seed);
}

inline void to_json(nlohmann::json& j, const ImportanceReport& r) {
  j = nlohmann::json{{"feature_probabilities", r.feature_probabilities},
                     {"observation_probabilities", r.observation_probabilities},
                     {"ensemble_tree_fis", r.ensemble_tree_fis},
                     {"ensemble_fair_fis", r.ensemble_fair_fis},
                     {"averaged_iterations", r.averaged_iterations}};
}

/// A trained ensemble with what is needed to apply it to new data.
struct Model {
  TrainConfig config;
  std::vector<std::string> feature_names;
  Ensemble ensemble;
  std::size_t iterations_run = 0;
  std::size_t best_iteration = 0;
  double best_oop = 0.0;
  std::vector<double> feature_probabilities;
  std::vector<double> ensemble_tree_fis;
};

inline Model make_model(const TrainResult& result, const TrainConfig& config,
                        const std::vector<std::string>& feature_names) {
  return {config,
          feature_names,
          result.ensemble,
          result.iterations_run,
          result.tracker.best_iteration,
          result.tracker.best_oop,
          result.report.feature_probabilities,
          result.report.ensemble_tree_fis};
}

/// Model document. It holds only quantities that do not depend on the
/// protected attribute when alpha = 0; the fairness scores live in the
/// importance report.
inline nlohmann::json model_to_json(const Model& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : model.ensemble.trees) trees.push_back(tree);
  return nlohmann::json{{"schema_version", kSchemaVersion},
                        {"kind", "fairpatch.model"},
                        {"config", model.config},
                        {"feature_names", model.feature_names},
                        {"iterations_run", model.iterations_run},
                        {"best_iteration", model.best_iteration},
                        {"best_oop", model.best_oop},
                        {"feature_probabilities", model.feature_probabilities},
                        {"ensemble_tree_fis", model.ensemble_tree_fis},
                        {"trees", trees}};
}

inline Model model_from_json(const nlohmann::json& j) {
  if (j.value("kind", std::string()) != "fairpatch.model") {
    throw SchemaError("document is not a fairpatch model");
  }
  if (j.value("schema_version", 0) != kSchemaVersion) {
    throw SchemaError("unsupported model schema_version");
  }
  Model model;
  model.config = j.at("config").get<TrainConfig>();
  model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  model.iterations_run = j.value("iterations_run", std::size_t{0});
  model.best_iteration = j.value("best_iteration", std::size_t{0});
  model.best_oop = j.value("best_oop", 0.0);
  model.feature_probabilities = j.value("feature_probabilities", std::vector<double>{});
  model.ensemble_tree_fis = j.value("ensemble_tree_fis", std::vector<double>{});
  for (const auto& t : j.at("trees")) {
    DecisionTree tree = tree_from_json(t);
    for (std::size_t f : tree.feature_subset()) {
      if (f >= model.feature_names.size()) throw SchemaError("tree feature index out of range");
    }
    model.ensemble.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace fairpatch
