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


#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "fairpatch/fairpatch.hpp"

namespace fairpatch {
namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

TEST(InitState, UniformStart) {
  const SamplerState state = init_state(4, 5, 0.5, 0.2, 1e-4, 1);
  EXPECT_EQ(state.p(), std::vector<double>(4, 0.25));
  EXPECT_EQ(state.q(), std::vector<double>(5, 0.2));
  EXPECT_TRUE(state.invariants_hold());
}

TEST(InitState, RejectsInvalidParameters) {
  EXPECT_THROW(init_state(4, 5, 0.5, 0.0, 1e-4, 1), ConfigError);
  EXPECT_THROW(init_state(4, 5, 0.5, 1.0, 1e-4, 1), ConfigError);
  EXPECT_THROW(init_state(4, 5, -0.1, 0.2, 1e-4, 1), ConfigError);
  EXPECT_THROW(init_state(4, 5, 1.1, 0.2, 1e-4, 1), ConfigError);
  EXPECT_THROW(init_state(4, 5, 0.5, 0.2, 0.2, 1), ConfigError);
  EXPECT_THROW(init_state(4, 5, 0.5, 0.2, 0.0, 1), ConfigError);
}

TEST(SampleMinipatch, ExhaustiveDrawTakesEveryIndex) {
  SamplerState state = init_state(6, 3, 0.5, 0.2, 1e-4, 2);
  const Minipatch patch = sample_minipatch(state, 6, 3);
  EXPECT_EQ(patch.rows, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(patch.cols, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(SampleMinipatch, IndicesSortedAndDistinct) {
  SamplerState state = init_state(100, 20, 0.5, 0.2, 1e-4, 3);
  for (int draw = 0; draw < 200; ++draw) {
    const Minipatch patch = state.sample_minipatch(10, 5);
    ASSERT_EQ(patch.rows.size(), 10u);
    ASSERT_EQ(patch.cols.size(), 5u);
    EXPECT_TRUE(std::adjacent_find(patch.rows.begin(), patch.rows.end(),
                                   std::greater_equal<>()) == patch.rows.end());
    EXPECT_TRUE(std::adjacent_find(patch.cols.begin(), patch.cols.end(),
                                   std::greater_equal<>()) == patch.cols.end());
  }
}

TEST(SampleMinipatch, SameSeedSameSequence) {
  SamplerState a = init_state(50, 10, 0.5, 0.2, 1e-4, 9);
  SamplerState b = init_state(50, 10, 0.5, 0.2, 1e-4, 9);
  for (int draw = 0; draw < 20; ++draw) EXPECT_EQ(a.sample_minipatch(7, 3), b.sample_minipatch(7, 3));
}

TEST(WeightedSample, ConcentratedMassWins) {
  Rng rng(4);
  const std::vector<double> weights{0.01, 0.01, 0.01, 0.97};
  int hits = 0;
  for (int draw = 0; draw < 1000; ++draw) {
    hits += weighted_sample_without_replacement(weights, 1, rng)[0] == 3;
  }
  EXPECT_GE(hits, 940);
}

TEST(WeightedSample, ZeroWeightNeverDrawn) {
  Rng rng(5);
  const std::vector<double> weights{0.5, 0.0, 0.5};
  for (int draw = 0; draw < 500; ++draw) {
    EXPECT_EQ(weighted_sample_without_replacement(weights, 2, rng),
              (std::vector<std::size_t>{0, 2}));
  }
  EXPECT_THROW(weighted_sample_without_replacement(weights, 3, rng), SamplingError);
  EXPECT_THROW(weighted_sample_without_replacement(weights, 4, rng), SamplingError);
}

TEST(WeightedSample, SingleDrawFrequenciesWithinBinomialBounds) {
  Rng rng(6);
  std::vector<double> weights(12);
  for (auto& w : weights) w = rng.uniform_open() + 0.05;
  const double total = sum(weights);
  const int draws = 100000;
  std::vector<int> counts(weights.size(), 0);
  for (int d = 0; d < draws; ++d) ++counts[weighted_sample_without_replacement(weights, 1, rng)[0]];
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double p = weights[i] / total;
    const double sigma = std::sqrt(draws * p * (1.0 - p));
    EXPECT_NEAR(counts[i], draws * p, 3.0 * sigma) << "index " << i;
  }
}

// --- observation update ---------------------------------------------------

TEST(UpdateObservations, ZeroMarginsStayUniform) {
  SamplerState state = init_state(4, 2, 0.0, 0.2, 1e-4, 1);
  const std::vector<double> margins(4, 0.0);
  const std::vector<int> y{1, -1, 1, -1};
  const std::vector<int> z{0, 1, 0, 1};
  const Minipatch patch{{0, 1}, {0}};
  const std::vector<int> h{1, -1};
  update_observation_probs(state, margins, patch, fit_adversary(h, std::vector<int>{0, 1}), h, y,
                           z, 1);
  for (double v : state.loss_acc()) EXPECT_EQ(v, 1.0);
  for (double v : state.p()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(UpdateObservations, MisclassifiedPointUpsampled) {
  SamplerState state = init_state(2, 1, 0.0, 0.2, 1e-4, 1);
  const std::vector<double> margins{-3.0, 3.0};
  const std::vector<int> y{1, 1};
  const std::vector<int> z{0, 1};
  const Minipatch patch{{0, 1}, {0}};
  const std::vector<int> h{1, 1};
  state.update_observation_probs(margins, patch, AdversaryModel{}, h, y, z, 1);
  EXPECT_DOUBLE_EQ(state.loss_acc()[0], std::exp(3.0));
  EXPECT_DOUBLE_EQ(state.loss_acc()[1], std::exp(-3.0));
  EXPECT_NEAR(state.p()[0] / state.p()[1], std::exp(6.0), 1e-9 * std::exp(6.0));
}

TEST(UpdateObservations, MarginScaledByIterationAndClamped) {
  SamplerState state = init_state(2, 1, 0.0, 0.2, 1e-4, 1);
  const std::vector<int> y{1, -1};
  const std::vector<int> z{0, 1};
  const Minipatch patch{{0, 1}, {0}};
  const std::vector<int> h{1, 1};
  state.update_observation_probs(std::vector<double>{-4.0, 2.0}, patch, AdversaryModel{}, h, y, z,
                                 4);
  EXPECT_DOUBLE_EQ(state.loss_acc()[0], std::exp(1.0));
  EXPECT_DOUBLE_EQ(state.loss_acc()[1], std::exp(0.5));
  state.update_observation_probs(std::vector<double>{-1000.0, -1000.0}, patch, AdversaryModel{},
                                 h, y, z, 1);
  EXPECT_DOUBLE_EQ(state.loss_acc()[0], std::exp(kExponentClamp));
  EXPECT_DOUBLE_EQ(state.loss_acc()[1], std::exp(-kExponentClamp));
  EXPECT_TRUE(state.invariants_hold());
}

// The fairness loss is the adversary's exponential loss: a row whose group the
// adversary already predicts well is downweighted, and a row it gets wrong is
// upweighted. Rows outside the patch keep their previous fairness loss.
TEST(UpdateObservations, FairnessLossFollowsAdversaryMargin) {
  SamplerState state = init_state(3, 1, 1.0, 0.2, 1e-4, 1);
  const std::vector<double> margins(3, 0.0);
  const std::vector<int> y{1, 1, 1};
  const std::vector<int> z{1, 0, 1};
  const Minipatch patch{{0, 1}, {0}};
  const std::vector<int> h{1, 1};
  const AdversaryModel adversary{0.75, 0.25};
  state.update_observation_probs(margins, patch, adversary, h, y, z, 1);
  EXPECT_NEAR(state.loss_fair()[0], 0.6065306597126334, 1e-15);
  EXPECT_NEAR(state.loss_fair()[1], 1.6487212707001282, 1e-15);
  EXPECT_EQ(state.loss_fair()[2], 1.0);
  const double total = state.loss_fair()[0] + state.loss_fair()[1] + 1.0;
  EXPECT_DOUBLE_EQ(state.p()[1], state.loss_fair()[1] / total);
}

TEST(UpdateObservations, RejectsBadShapes) {
  SamplerState state = init_state(3, 1, 0.5, 0.2, 1e-4, 1);
  const Minipatch patch{{0, 1}, {0}};
  const std::vector<int> y{1, 1, 1};
  const std::vector<int> z{1, 0, 1};
  EXPECT_THROW(state.update_observation_probs(std::vector<double>(2, 0.0), patch,
                                              AdversaryModel{}, std::vector<int>{1, 1}, y, z, 1),
               SchemaError);
  EXPECT_THROW(state.update_observation_probs(std::vector<double>(3, 0.0), patch,
                                              AdversaryModel{}, std::vector<int>{1}, y, z, 1),
               SchemaError);
  EXPECT_THROW(state.update_observation_probs(std::vector<double>(3, 0.0), patch,
                                              AdversaryModel{}, std::vector<int>{1, 1}, y, z, 0),
               ConfigError);
}

// --- feature update -------------------------------------------------------

TEST(UpdateFeatures, MixesTowardNormalizedImportance) {
  SamplerState state = init_state(10, 10, 0.0, 0.2, 1e-4, 1);
  const Minipatch patch{{0}, {0, 1}};
  update_feature_probs(state, patch, std::vector<double>{1.0, 1.0},
                       std::vector<double>{0.0, 0.0});
  // Each patch column becomes 0.8 * 0.1 + 0.2 * 0.5 = 0.18, the rest stay 0.1.
  EXPECT_DOUBLE_EQ(state.q()[0], 0.18 / 1.16);
  EXPECT_DOUBLE_EQ(state.q()[1], 0.18 / 1.16);
  EXPECT_DOUBLE_EQ(state.q()[5], 0.1 / 1.16);
}

TEST(UpdateFeatures, NegativeFairnessScoresAreIgnored) {
  SamplerState state = init_state(10, 10, 1.0, 0.2, 1e-4, 1);
  const Minipatch patch{{0}, {0, 1}};
  update_feature_probs(state, patch, std::vector<double>{0.3, 0.7},
                       std::vector<double>{-0.2, 0.0});
  // alpha = 1 and relu(F) = 0: patch columns decay by (1 - mu) before normalizing.
  EXPECT_DOUBLE_EQ(state.q()[0] / state.q()[4], 0.8);
  EXPECT_DOUBLE_EQ(state.q()[1] / state.q()[4], 0.8);
}

TEST(UpdateFeatures, FairnessShareGoesToPositiveScores) {
  SamplerState state = init_state(10, 4, 1.0, 0.5, 1e-4, 1);
  const Minipatch patch{{0}, {0, 1, 2}};
  update_feature_probs(state, patch, std::vector<double>{1.0, 0.0, 0.0},
                       std::vector<double>{-1.0, 0.25, 0.75});
  // q~ = (0.125, 0.125 + 0.125, 0.125 + 0.375, 0.25), which sums to 1.125.
  EXPECT_DOUBLE_EQ(state.q()[0], 0.125 / 1.125);
  EXPECT_DOUBLE_EQ(state.q()[1], 0.25 / 1.125);
  EXPECT_DOUBLE_EQ(state.q()[2], 0.5 / 1.125);
  EXPECT_DOUBLE_EQ(state.q()[3], 0.25 / 1.125);
}

TEST(UpdateFeatures, TinyEntriesAreFloored) {
  const double eps = 1e-4;
  SamplerState state = init_state(10, 3, 0.0, 0.5, eps, 1);
  const Minipatch patch{{0}, {0, 1, 2}};
  for (int step = 0; step < 60; ++step) {
    update_feature_probs(state, patch, std::vector<double>{1.0, 0.0, 0.0},
                         std::vector<double>{0.0, 0.0, 0.0});
  }
  // Unfloored the entry would be about 0.5^60; the floor holds it near eps.
  EXPECT_GE(state.q()[1], eps / (1.0 + 3.0 * eps));
  EXPECT_LE(state.q()[1], eps);
  EXPECT_EQ(state.q()[1], state.q()[2]);
  EXPECT_TRUE(state.invariants_hold());
}

TEST(UpdateFeatures, UniformImportanceIsFixedPoint) {
  SamplerState state = init_state(10, 8, 0.0, 0.3, 1e-4, 1);
  const Minipatch patch{{0}, {0, 1, 2, 3, 4, 5, 6, 7}};
  for (int step = 0; step < 100; ++step) {
    update_feature_probs(state, patch, std::vector<double>(8, 2.0), std::vector<double>(8, 0.0));
  }
  for (double v : state.q()) EXPECT_NEAR(v, 0.125, 1e-15);
}

TEST(UpdateFeatures, ZeroImportanceSpreadsEvenlyOverPatch) {
  SamplerState state = init_state(10, 4, 0.0, 0.2, 1e-4, 1);
  const Minipatch patch{{0}, {0, 1}};
  update_feature_probs(state, patch, std::vector<double>{0.0, 0.0},
                       std::vector<double>{0.0, 0.0});
  // Single-leaf trees carry no importance; the accuracy term splits evenly,
  // giving q~ = (0.3, 0.3, 0.25, 0.25) before normalizing.
  EXPECT_DOUBLE_EQ(state.q()[0], 0.3 / 1.1);
  EXPECT_DOUBLE_EQ(state.q()[2], 0.25 / 1.1);
  EXPECT_TRUE(state.invariants_hold());
}

// Property: random interleavings of both updates keep every distribution
// invariant intact.
TEST(SamplerProperty, InvariantsHoldAcrossRandomUpdates) {
  Rng rng(12345);
  std::size_t steps = 0;
  for (int run = 0; run < 40; ++run) {
    const std::size_t n_rows = 2 + rng.below(60);
    const std::size_t n_features = 1 + rng.below(30);
    const double alpha = run % 4 == 0 ? 0.0 : run % 4 == 1 ? 1.0 : rng.uniform_open();
    const double mu = rng.uniform_open();
    const double eps = rng.uniform_open() * 0.9 / static_cast<double>(n_features);
    SamplerState state(n_rows, n_features, alpha, mu, eps, rng.next_u64());
    std::vector<int> y(n_rows);
    std::vector<int> z(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) {
      y[i] = rng.bernoulli(0.5) ? 1 : -1;
      z[i] = rng.bernoulli(0.5) ? 1 : 0;
    }
    std::vector<double> margins(n_rows, 0.0);
    for (std::size_t t = 1; t <= 260; ++t, ++steps) {
      const std::size_t n = 1 + rng.below(n_rows);
      const std::size_t m = 1 + rng.below(n_features);
      const Minipatch patch = state.sample_minipatch(n, m);
      std::vector<int> h(n);
      std::vector<int> z_patch(n);
      for (std::size_t k = 0; k < n; ++k) {
        h[k] = rng.bernoulli(0.5) ? 1 : -1;
        z_patch[k] = z[patch.rows[k]];
      }
      for (std::size_t i = 0; i < n_rows; ++i) margins[i] += rng.bernoulli(0.5) ? 1 : -1;
      if (t % 50 == 0) std::fill(margins.begin(), margins.end(), -1e6);  // saturate the clamp
      state.update_observation_probs(margins, patch, fit_adversary(h, z_patch), h, y, z, t);
      std::vector<double> importance(m);
      std::vector<double> fair(m);
      for (std::size_t k = 0; k < m; ++k) {
        importance[k] = rng.bernoulli(0.3) ? 0.0 : rng.uniform_open();
        fair[k] = rng.uniform_open() - 0.6;
      }
      state.update_feature_probs(patch, importance, fair);
      ASSERT_TRUE(state.invariants_hold(1e-9)) << "run " << run << " step " << t;
      ASSERT_NEAR(sum(state.p()), 1.0, 1e-9);
      ASSERT_NEAR(sum(state.q()), 1.0, 1e-9);
    }
  }
  EXPECT_GE(steps, 10000u);
}

}  // namespace
}  // namespace fairpatch
