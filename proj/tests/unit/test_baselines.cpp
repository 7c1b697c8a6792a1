/* Copyright 2026 The hetsp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <algorithm>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "hetsp/baselines.hpp"
#include "hetsp/cost_model.hpp"
#include "oracles.hpp"

namespace hetsp {
namespace {

using Packs = std::vector<std::vector<Tokens>>;

TEST(Bfd, TwoLengthExample) {
  const std::vector<Tokens> lengths{100000, 48000, 48000, 48000, 48000};
  EXPECT_EQ(bfd_pack(lengths, 192000),
            (Packs{{100000, 48000}, {48000, 48000, 48000}}));
}

TEST(Bfd, FullLengthsOnePackEach) {
  const std::vector<Tokens> lengths{50, 50, 50};
  EXPECT_EQ(bfd_pack(lengths, 50), (Packs{{50}, {50}, {50}}));
}

TEST(Bfd, SmallExample) {
  const std::vector<Tokens> lengths{60, 40, 30, 30, 20};
  EXPECT_EQ(bfd_pack(lengths, 100), (Packs{{60, 40}, {30, 30, 20}}));
}

TEST(Bfd, PrefersFullestPack) {
  // After 70 and 50, the 30 goes beside the 70 (fullest that fits).
  const std::vector<Tokens> lengths{50, 30, 70};
  EXPECT_EQ(bfd_pack(lengths, 100), (Packs{{70, 30}, {50}}));
}

TEST(Bfd, IndicesFollowLengths) {
  const std::vector<Tokens> lengths{20, 60, 30, 40, 30};
  const auto idx = bfd_pack_indices(lengths, 100);
  const auto packs = bfd_pack(lengths, 100);
  ASSERT_EQ(idx.size(), packs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    ASSERT_EQ(idx[i].size(), packs[i].size());
    for (std::size_t j = 0; j < idx[i].size(); ++j) EXPECT_EQ(lengths[idx[i][j]], packs[i][j]);
  }
}

TEST(Bfd, RandomPacksRespectCapacity) {
  std::mt19937_64 rng(1);
  for (int it = 0; it < 200; ++it) {
    std::vector<Tokens> lengths(1 + rng() % 30);
    for (auto& s : lengths) s = 1 + static_cast<Tokens>(rng() % 100);
    const auto packs = bfd_pack(lengths, 100);
    std::vector<Tokens> flat;
    Tokens lower_bound = 0;
    for (Tokens s : lengths) lower_bound += s;
    for (const auto& p : packs) {
      Tokens sum = 0;
      for (Tokens s : p) sum += s;
      EXPECT_LE(sum, 100);
      flat.insert(flat.end(), p.begin(), p.end());
    }
    std::sort(flat.begin(), flat.end());
    std::sort(lengths.begin(), lengths.end());
    EXPECT_EQ(flat, lengths);
    EXPECT_GE(static_cast<Tokens>(packs.size()) * 100, lower_bound);
  }
}

TEST(Bfd, RejectsOversizedLength) {
  const std::vector<Tokens> lengths{101};
  EXPECT_THROW(bfd_pack(lengths, 100), InvalidInput);
}

TEST(Static, TwoLengthExampleAtThirtyTwo) {
  const auto c = oracle::two_length_cluster();
  const auto k = oracle::two_length_coeffs();
  const Plan p = plan_static(oracle::two_length_batch(), c, k, 32);
  EXPECT_EQ(p.strategy, "static");
  EXPECT_EQ(p.static_degree, 32);
  ASSERT_EQ(p.micro_batches.size(), 1u);
  EXPECT_EQ(groups_summary(p), "⟨32×2⟩");
  // Packs {100K, 48K} and {48K x3}; the first is critical.
  const double expect = oracle::group_time({100000, 48000}, 32, c.inter_node_bandwidth, k);
  EXPECT_NEAR(p.predicted_total_time, expect, 1e-12);
  EXPECT_NEAR(p.predicted_total_time, 3.957, 0.001);
}

TEST(Static, CapacityAndContextWindow) {
  const auto c = oracle::two_length_cluster();
  const auto k = oracle::two_length_coeffs();
  EXPECT_EQ(static_capacity(8, c, k), 48000);
  BaselineOptions o;
  o.context_window = 32768;
  EXPECT_EQ(static_capacity(8, c, k, o), 32768);
  EXPECT_EQ(static_capacity(2, c, k, o), 12000);
}

TEST(Static, WavesHoldAtMostOnePackPerGroup) {
  ClusterSpec c{8, 4, 4.0, 1.0, 100 + 1000};
  CostCoefficients k;
  k.alpha2 = 0.01;
  k.alpha3 = 0.1;
  k.m_token = 1;
  k.m_ms = 100;
  std::mt19937_64 rng(9);
  SequenceBatch batch{"w", std::vector<Tokens>(40)};
  for (auto& s : batch.lengths) s = 1 + static_cast<Tokens>(rng() % 1500);
  const Plan p = plan_static(batch, c, k, 2);
  double total = 0;
  std::size_t seqs = 0;
  for (const auto& mb : p.micro_batches) {
    EXPECT_LE(mb.selected_groups.size(), 4u);
    double worst = 0;
    for (const auto& g : mb.selected_groups) {
      EXPECT_EQ(g.degree, 2);
      EXPECT_LE(g.breakdown.memory_bytes, c.memory_budget);
      worst = std::max(worst, g.breakdown.true_time);
      seqs += g.sequences.size();
    }
    EXPECT_EQ(mb.predicted_makespan, worst);
    EXPECT_FALSE(mb.plan_warning);
    total += mb.predicted_makespan;
  }
  EXPECT_EQ(seqs, batch.lengths.size());
  EXPECT_EQ(p.predicted_total_time, total);
}

TEST(Static, InfeasibleWhenSequenceExceedsCapacity) {
  const auto c = oracle::two_length_cluster();
  const auto k = oracle::two_length_coeffs();
  EXPECT_THROW(plan_static(oracle::two_length_batch(), c, k, 8), Infeasible);
  EXPECT_THROW(plan_static(oracle::two_length_batch(), c, k, 3), InvalidInput);
  EXPECT_EQ(feasible_static_degrees(oracle::two_length_batch(), c, k), (std::vector<int>{32, 64}));
}

TEST(BatchAda, MinimumOverFeasibleDegrees) {
  ClusterSpec c{16, 4, 4.0, 1.0, 100 + 1000};
  CostCoefficients k;
  k.alpha1 = 1e-5;
  k.alpha2 = 0.01;
  k.alpha3 = 0.3;
  k.m_token = 1;
  k.m_ms = 100;
  std::mt19937_64 rng(10);
  for (int it = 0; it < 10; ++it) {
    SequenceBatch batch{"a", std::vector<Tokens>(30)};
    for (auto& s : batch.lengths) s = 1 + static_cast<Tokens>(rng() % 3000);
    const Plan ada = plan_batch_ada(batch, c, k);
    EXPECT_EQ(ada.strategy, "batch_ada");
    double best = std::numeric_limits<double>::infinity();
    for (int d : feasible_static_degrees(batch, c, k)) {
      const double t = plan_static(batch, c, k, d).predicted_total_time;
      EXPECT_LE(ada.predicted_total_time, t);
      best = std::min(best, t);
    }
    EXPECT_EQ(ada.predicted_total_time, best);
  }
}

}  // namespace
}  // namespace hetsp
