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

// Shallow CART classification trees fit on minipatches, plus the two
// per-feature importance scores the feature sampler consumes:
//   tree_fis       mean decrease in Gini impurity (MDI)
//   fair_tree_fis  decrease in demographic-parity gap attributable to each split

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairpatch/common.hpp"
#include "fairpatch/dataset.hpp"
#include "fairpatch/fairness.hpp"

namespace fairpatch {

enum class Impurity { kGini };

struct TreeConfig {
  int max_depth = 2;
  int min_samples_leaf = 1;
  Impurity impurity = Impurity::kGini;

  void validate() const {
    if (max_depth < 1) throw ConfigError("max_depth must be at least 1");
    if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be at least 1");
  }
};

struct TreeNode {
  int feature = -1;  // position in the tree's feature_subset; -1 for leaves
  double threshold = 0.0;
  int left = -1;   // x <= threshold
  int right = -1;  // x > threshold
  int prediction = 1;  // majority label of the training samples reaching the node

  bool is_leaf() const noexcept { return feature < 0; }
};

class DecisionTree {
 public:
  DecisionTree() : nodes_{TreeNode{}} {}

  DecisionTree(std::vector<TreeNode> nodes, std::vector<std::size_t> feature_subset)
      : nodes_(std::move(nodes)), feature_subset_(std::move(feature_subset)) {
    if (nodes_.empty()) throw SchemaError("tree needs at least one node");
    for (const auto& node : nodes_) {
      if (node.prediction != 1 && node.prediction != -1) {
        throw SchemaError("node prediction must be -1 or +1");
      }
      if (node.is_leaf()) continue;
      if (static_cast<std::size_t>(node.feature) >= feature_subset_.size()) {
        throw SchemaError("node feature outside the tree's feature subset");
      }
      const auto bad = [&](int child) {
        return child <= 0 || static_cast<std::size_t>(child) >= nodes_.size();
      };
      if (bad(node.left) || bad(node.right)) throw SchemaError("node child index out of range");
    }
    depth_ = depth_from(0);
  }

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const std::vector<std::size_t>& feature_subset() const noexcept { return feature_subset_; }
  int depth() const noexcept { return depth_; }

  std::size_t internal_count() const {
    return static_cast<std::size_t>(std::count_if(
        nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return !n.is_leaf(); }));
  }

  /// Prediction for a full-width row; the tree reads only its feature subset.
  int predict(std::span<const double> row) const noexcept {
    return nodes_[leaf_for(row, true)].prediction;
  }

  /// Prediction for a row already restricted to the feature subset.
  int predict_local(std::span<const double> patch_row) const noexcept {
    return nodes_[leaf_for(patch_row, false)].prediction;
  }

  /// Node ids visited from the root to the leaf, for a subset-restricted row.
  std::vector<int> path_local(std::span<const double> patch_row) const {
    std::vector<int> path{0};
    int id = 0;
    while (!nodes_[id].is_leaf()) {
      const auto& node = nodes_[id];
      id = patch_row[node.feature] <= node.threshold ? node.left : node.right;
      path.push_back(id);
    }
    return path;
  }

 private:
  int leaf_for(std::span<const double> row, bool global) const noexcept {
    int id = 0;
    while (!nodes_[id].is_leaf()) {
      const auto& node = nodes_[id];
      const std::size_t col =
          global ? feature_subset_[node.feature] : static_cast<std::size_t>(node.feature);
      id = row[col] <= node.threshold ? node.left : node.right;
    }
    return id;
  }

  int depth_from(int id) const {
    const auto& node = nodes_[id];
    if (node.is_leaf()) return 0;
    return 1 + std::max(depth_from(node.left), depth_from(node.right));
  }

  std::vector<TreeNode> nodes_;
  std::vector<std::size_t> feature_subset_;
  int depth_ = 0;
};

inline double gini(std::size_t positives, std::size_t total) {
  if (total == 0) return 0.0;
  const double p = static_cast<double>(positives) / static_cast<double>(total);
  return 2.0 * p * (1.0 - p);
}

namespace detail {

inline int majority(std::size_t positives, std::size_t total) {
  return 2 * positives >= total ? 1 : -1;
}

// Gini gain ordering without rounding: minimizing the weighted child impurity
// is maximizing (pL^2 + nL^2) / NL + (pR^2 + nR^2) / NR. Candidates are
// compared by cross-multiplication so equal gains compare equal.
struct SplitScore {
  __int128 numerator = -1;
  __int128 denominator = 1;

  static SplitScore of(std::size_t pos_l, std::size_t tot_l, std::size_t pos_r,
                       std::size_t tot_r) {
    const auto sq = [](std::size_t v) { return static_cast<__int128>(v) * v; };
    const __int128 sl = sq(pos_l) + sq(tot_l - pos_l);
    const __int128 sr = sq(pos_r) + sq(tot_r - pos_r);
    return {sl * static_cast<__int128>(tot_r) + sr * static_cast<__int128>(tot_l),
            static_cast<__int128>(tot_l) * static_cast<__int128>(tot_r)};
  }

  bool better_than(const SplitScore& other) const {
    return numerator * other.denominator > other.numerator * denominator;
  }
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const int> y, const TreeConfig& config)
      : x_(x), y_(y), config_(config) {}

  std::vector<TreeNode> build() {
    std::vector<std::size_t> rows(x_.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    grow(rows, 0);
    return std::move(nodes_);
  }

 private:
  int grow(std::vector<std::size_t>& rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    std::size_t positives = 0;
    for (std::size_t r : rows) positives += y_[r] > 0 ? 1 : 0;
    nodes_[id].prediction = majority(positives, rows.size());

    const auto leaf_size = static_cast<std::size_t>(config_.min_samples_leaf);
    const bool pure = positives == 0 || positives == rows.size();
    if (depth >= config_.max_depth || pure || rows.size() < 2 * leaf_size) return id;

    int best_feature = -1;
    double best_threshold = 0.0;
    SplitScore best;
    std::vector<std::size_t> order(rows);
    for (std::size_t f = 0; f < x_.cols(); ++f) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x_(a, f) < x_(b, f) || (x_(a, f) == x_(b, f) && a < b);
      });
      std::size_t pos_left = 0;
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        pos_left += y_[order[k]] > 0 ? 1 : 0;
        const double lo = x_(order[k], f);
        const double hi = x_(order[k + 1], f);
        if (!(lo < hi)) continue;
        const std::size_t n_left = k + 1;
        const std::size_t n_right = order.size() - n_left;
        if (n_left < leaf_size || n_right < leaf_size) continue;
        const auto score = SplitScore::of(pos_left, n_left, positives - pos_left, n_right);
        if (best_feature < 0 || score.better_than(best)) {
          best = score;
          best_feature = static_cast<int>(f);
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid < hi)) mid = lo;
          best_threshold = mid;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (std::size_t r : rows) {
      (x_(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
    }
    nodes_[id].feature = best_feature;
    nodes_[id].threshold = best_threshold;
    const int left = grow(left_rows, depth + 1);
    nodes_[id].left = left;
    const int right = grow(right_rows, depth + 1);
    nodes_[id].right = right;
    return id;
  }

  const Matrix& x_;
  std::span<const int> y_;
  const TreeConfig& config_;
  std::vector<TreeNode> nodes_;
};

}  // namespace detail

/// Greedy CART growth. Every midpoint between consecutive distinct values is
/// a candidate; zero-gain splits are allowed so that interactions such as XOR
/// are reachable. Ties go to the lower feature, then the lower threshold.
/// `feature_subset` maps patch columns to global feature indices (identity
/// when empty).
inline DecisionTree fit_tree(const Matrix& x_patch, std::span<const int> y_patch,
                             const TreeConfig& config,
                             std::vector<std::size_t> feature_subset = {}) {
  config.validate();
  if (x_patch.rows() != y_patch.size()) throw SchemaError("x_patch and y_patch differ in rows");
  if (x_patch.cols() < 1) throw SchemaError("fit_tree needs at least one feature");
  if (x_patch.rows() < 2 * static_cast<std::size_t>(config.min_samples_leaf)) {
    throw DataError("patch has fewer than 2 * min_samples_leaf rows");
  }
  if (feature_subset.empty()) {
    feature_subset.resize(x_patch.cols());
    std::iota(feature_subset.begin(), feature_subset.end(), std::size_t{0});
  }
  if (feature_subset.size() != x_patch.cols()) {
    throw SchemaError("feature_subset length does not match patch columns");
  }
  detail::TreeBuilder builder(x_patch, y_patch, config);
  return DecisionTree(builder.build(), std::move(feature_subset));
}

inline int predict_tree(const DecisionTree& tree, std::span<const double> row) {
  return tree.predict(row);
}

/// Mean decrease in Gini impurity per patch column:
///   I_j = sum over nodes t splitting on j of
///         (N_t / n) [gini(t) - (N_L / N_t) gini(L) - (N_R / N_t) gini(R)].
inline std::vector<double> tree_fis(const DecisionTree& tree, const Matrix& x_patch,
                                    std::span<const int> y_patch) {
  const auto& nodes = tree.nodes();
  std::vector<std::size_t> reach(nodes.size(), 0);
  std::vector<std::size_t> pos(nodes.size(), 0);
  for (std::size_t i = 0; i < x_patch.rows(); ++i) {
    for (int id : tree.path_local(x_patch.row(i))) {
      ++reach[id];
      pos[id] += y_patch[i] > 0 ? 1 : 0;
    }
  }
  std::vector<double> importance(tree.feature_subset().size(), 0.0);
  const double n = static_cast<double>(x_patch.rows());
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    const auto& node = nodes[id];
    if (node.is_leaf() || reach[id] == 0) continue;
    const double nt = static_cast<double>(reach[id]);
    const double decrease = gini(pos[id], reach[id]) -
                            reach[node.left] / nt * gini(pos[node.left], reach[node.left]) -
                            reach[node.right] / nt * gini(pos[node.right], reach[node.right]);
    importance[node.feature] += nt / n * decrease;
  }
  return importance;
}

/// Signed fairness importance per patch column. For each split node t, two
/// versions of the tree are compared on the patch: one with t collapsed to a
/// leaf (predicting t's majority label) and one with t's children collapsed to
/// leaves. Every sample not reaching t keeps the full tree's prediction. The
/// split's contribution is the drop in demographic-parity gap between them:
///   F_j = sum over nodes t splitting on j of gap(t as leaf) - gap(t split once).
/// Positive values mark splits that move the tree toward parity, negative
/// values splits that introduce bias. All zero when z has one group.
inline std::vector<double> fair_tree_fis(const DecisionTree& tree, const Matrix& x_patch,
                                         std::span<const int> y_patch,
                                         std::span<const int> z_patch) {
  (void)y_patch;  // node majorities are stored on the tree
  const auto& nodes = tree.nodes();
  std::vector<double> importance(tree.feature_subset().size(), 0.0);
  const std::size_t n = x_patch.rows();
  if (z_patch.size() != n) throw SchemaError("z_patch length does not match patch rows");
  const bool single_group =
      std::all_of(z_patch.begin(), z_patch.end(), [&](int v) { return v == z_patch[0]; });
  if (n == 0 || single_group) return importance;

  std::vector<std::vector<int>> paths(n);
  std::vector<int> full(n);
  for (std::size_t i = 0; i < n; ++i) {
    paths[i] = tree.path_local(x_patch.row(i));
    full[i] = nodes[paths[i].back()].prediction;
  }
  std::vector<int> collapsed(n);
  std::vector<int> split_once(n);
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    const auto& node = nodes[id];
    if (node.is_leaf()) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& path = paths[i];
      const auto at = std::find(path.begin(), path.end(), static_cast<int>(id));
      if (at == path.end()) {
        collapsed[i] = split_once[i] = full[i];
      } else {
        collapsed[i] = node.prediction;
        split_once[i] = nodes[*(at + 1)].prediction;
      }
    }
    importance[node.feature] += dp_gap(collapsed, z_patch) - dp_gap(split_once, z_patch);
  }
  return importance;
}

inline void to_json(nlohmann::json& j, const TreeConfig& c) {
  j = nlohmann::json{
      {"max_depth", c.max_depth}, {"min_samples_leaf", c.min_samples_leaf}, {"impurity", "gini"}};
}

inline void from_json(const nlohmann::json& j, TreeConfig& c) {
  const TreeConfig d;
  c.max_depth = j.value("max_depth", d.max_depth);
  c.min_samples_leaf = j.value("min_samples_leaf", d.min_samples_leaf);
  if (j.value("impurity", std::string("gini")) != "gini") {
    throw ConfigError("only gini impurity is supported");
  }
  c.impurity = Impurity::kGini;
}

/// Nodes carry the global feature index under "feature" (-1 for leaves).
inline void to_json(nlohmann::json& j, const DecisionTree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& node : tree.nodes()) {
    nlohmann::json n{{"prediction", node.prediction}};
    if (node.is_leaf()) {
      n["feature"] = -1;
    } else {
      n["feature"] = tree.feature_subset()[node.feature];
      n["threshold"] = node.threshold;
      n["left"] = node.left;
      n["right"] = node.right;
    }
    nodes.push_back(std::move(n));
  }
  j = nlohmann::json{
      {"feature_subset", tree.feature_subset()}, {"depth", tree.depth()}, {"nodes", nodes}};
}

inline DecisionTree tree_from_json(const nlohmann::json& j) {
  auto subset = j.at("feature_subset").get<std::vector<std::size_t>>();
  std::vector<TreeNode> nodes;
  for (const auto& n : j.at("nodes")) {
    TreeNode node;
    node.prediction = n.at("prediction").get<int>();
    const long long feature = n.at("feature").get<long long>();
    if (feature >= 0) {
      const auto it = std::find(subset.begin(), subset.end(), static_cast<std::size_t>(feature));
      if (it == subset.end()) throw SchemaError("tree node feature not in feature_subset");
      node.feature = static_cast<int>(it - subset.begin());
      node.threshold = n.at("threshold").get<double>();
      node.left = n.at("left").get<int>();
      node.right = n.at("right").get<int>();
    }
    nodes.push_back(node);
  }
  return DecisionTree(std::move(nodes), std::move(subset));
}

}  // namespace fairpatch
