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
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairpatch/boosting.hpp"
#include "fairpatch/common.hpp"
#include "fairpatch/dataset.hpp"
#include "fairpatch/fairness.hpp"
#include "fairpatch/rng.hpp"
#include "fairpatch/split.hpp"

namespace fairpatch {

struct EvaluationReport {
  double accuracy = 0.0;
  double dp_gap = 0.0;
  double dp_ratio = 1.0;
  double fairness_score = 1.0;  // 1 - dp_gap
  std::size_t n_test = 0;
  Warnings warnings;
};

inline EvaluationReport evaluate_predictions(std::span<const int> predictions,
                                             const Dataset& test) {
  if (predictions.size() != test.rows()) throw SchemaError("one prediction per test row needed");
  EvaluationReport report;
  report.n_test = test.rows();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.rows(); ++i) {
    if (predictions[i] == test.labels()[i]) ++correct;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(test.rows());
  const GroupRates rates = group_rates(predictions, test.protected_attribute());
  if (!rates.defined()) {
    report.warnings.push_back("a protected group is empty; dp_gap reported as 0");
  }
  report.dp_gap = rates.dp_gap();
  report.dp_ratio = rates.dp_ratio();
  report.fairness_score = 1.0 - report.dp_gap;
  return report;
}

inline EvaluationReport evaluate(const Ensemble& ensemble, const Dataset& test) {
  const auto predictions = predict_all(ensemble, test);
  return evaluate_predictions(predictions, test);
}

inline void to_json(nlohmann::json& j, const EvaluationReport& r) {
  j = nlohmann::json{{"schema_version", kSchemaVersion},
                     {"accuracy", r.accuracy},
                     {"dp_gap", r.dp_gap},
                     {"dp_ratio", r.dp_ratio},
                     {"fairness_score", r.fairness_score},
                     {"n_test", r.n_test},
                     {"warnings", r.warnings}};
}

struct SweepOptions {
  double test_fraction = 0.3;
  std::size_t workers = 1;
};

struct SweepCell {
  double alpha = 0.0;
  std::size_t split = 0;
  EvaluationReport report;
  double seconds = 0.0;  // wall time to train and evaluate; not part of any output file
};

struct SweepSummary {
  double alpha = 0.0;
  std::size_t splits = 0;
  double mean_accuracy = 0.0;
  double sd_accuracy = 0.0;
  double mean_fairness = 0.0;
  double sd_fairness = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // alpha-major, then split
  std::vector<SweepSummary> summary;
};

inline double sample_sd(std::span<const double> values, double mean) {
  if (values.size() < 2) return 0.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

/// Trains and evaluates every (alpha, split) cell. Split s uses the same
/// partition and training seed for every alpha, so alphas are compared on
/// paired splits. Cells are independent; results do not depend on `workers`.
inline SweepResult alpha_sweep(const Dataset& data, const std::vector<double>& grid,
                               const TrainConfig& base_config, std::size_t splits,
                               const SweepOptions& options = {}) {
  if (grid.empty()) throw ConfigError("alpha grid is empty");
  if (splits < 1) throw ConfigError("splits must be at least 1");
  for (double a : grid) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("alpha grid values must lie in [0, 1]");
  }
  base_config.validate();

  std::vector<TrainTestSplit> partitions;
  partitions.reserve(splits);
  for (std::size_t s = 0; s < splits; ++s) {
    partitions.push_back(
        train_test_split(data, options.test_fraction, derive_seed(base_config.seed, "split", s)));
  }

  SweepResult result;
  result.cells.resize(grid.size() * splits);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto work = [&] {
    for (std::size_t cell = next++; cell < result.cells.size(); cell = next++) {
      try {
        const std::size_t a = cell / splits;
        const std::size_t s = cell % splits;
        TrainConfig config = base_config;
        config.alpha = grid[a];
        config.seed = derive_seed(base_config.seed, "train", s);
        const auto start = std::chrono::steady_clock::now();
        const auto trained = train(partitions[s].train, config);
        const auto report = evaluate(trained.ensemble, partitions[s].test);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        result.cells[cell] = {grid[a], s, report, elapsed.count()};
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, result.cells.size());
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t a = 0; a < grid.size(); ++a) {
    std::vector<double> acc;
    std::vector<double> fair;
    for (std::size_t s = 0; s < splits; ++s) {
      acc.push_back(result.cells[a * splits + s].report.accuracy);
      fair.push_back(result.cells[a * splits + s].report.fairness_score);
    }
    SweepSummary row;
    row.alpha = grid[a];
    row.splits = splits;
    for (double v : acc) row.mean_accuracy += v / static_cast<double>(splits);
    for (double v : fair) row.mean_fairness += v / static_cast<double>(splits);
    row.sd_accuracy = sample_sd(acc, row.mean_accuracy);
    row.sd_fairness = sample_sd(fair, row.mean_fairness);
    result.summary.push_back(row);
  }
  return result;
}

}  // namespace fairpatch
