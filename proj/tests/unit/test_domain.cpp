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

#include <map>

#include <gtest/gtest.h>

#include "hetsp/domain.hpp"

namespace hetsp {
namespace {

ClusterSpec cluster(int n, int g) {
  ClusterSpec c;
  c.total_devices = n;
  c.devices_per_node = g;
  c.intra_node_bandwidth = 2.0;
  c.inter_node_bandwidth = 1.0;
  c.memory_budget = 100;
  return c;
}

TEST(Catalog, TwoDevicesOneNode) {
  const auto cat = build_virtual_catalog(cluster(2, 2));
  ASSERT_EQ(cat.size(), 3u);
  EXPECT_EQ(cat.slots[0].degree, 2);
  EXPECT_EQ(cat.slots[1].degree, 1);
  EXPECT_EQ(cat.slots[2].degree, 1);
}

TEST(Catalog, SingleDevice) {
  const auto cat = build_virtual_catalog(cluster(1, 1));
  ASSERT_EQ(cat.size(), 1u);
  EXPECT_EQ(cat.slots[0].degree, 1);
}

TEST(Catalog, EightDevicesOneNodeAllIntra) {
  const auto cat = build_virtual_catalog(cluster(8, 8));
  ASSERT_EQ(cat.size(), 15u);
  std::map<int, int> count;
  for (std::size_t i = 0; i < cat.size(); ++i) {
    EXPECT_EQ(cat.slots[i].slot_id, static_cast<int>(i));
    EXPECT_EQ(cat.slots[i].bandwidth, 2.0);
    ++count[cat.slots[i].degree];
  }
  EXPECT_EQ(count, (std::map<int, int>{{1, 8}, {2, 4}, {4, 2}, {8, 1}}));
}

TEST(Catalog, DegreesAboveNodeUseInterBandwidth) {
  for (const auto& s : build_virtual_catalog(cluster(16, 4)).slots) {
    EXPECT_EQ(s.bandwidth, s.degree <= 4 ? 2.0 : 1.0) << s.degree;
  }
}

TEST(Catalog, OrderedByDegreeDescending) {
  const auto cat = build_virtual_catalog(cluster(32, 8));
  EXPECT_EQ(cat.size(), 63u);
  for (std::size_t i = 1; i < cat.size(); ++i) {
    EXPECT_GE(cat.slots[i - 1].degree, cat.slots[i].degree);
  }
}

TEST(Cluster, Validation) {
  EXPECT_NO_THROW(cluster(8, 4).validate());
  EXPECT_THROW(cluster(6, 2).validate(), InvalidInput);
  EXPECT_THROW(cluster(8, 3).validate(), InvalidInput);
  EXPECT_THROW(cluster(8, 16).validate(), InvalidInput);
  auto c = cluster(8, 4);
  c.intra_node_bandwidth = 0.5;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = cluster(8, 4);
  c.inter_node_bandwidth = 0;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = cluster(8, 4);
  c.memory_budget = 0;
  EXPECT_THROW(c.validate(), InvalidInput);
}

TEST(Coefficients, Validation) {
  CostCoefficients k;
  k.m_token = 2;
  k.m_ms = 10;
  EXPECT_NO_THROW(k.validate(cluster(2, 2)));
  EXPECT_EQ(k.device_token_capacity(cluster(2, 2)), 45);
  k.m_ms = 100;
  EXPECT_THROW(k.validate(cluster(2, 2)), InvalidInput);
  k.m_ms = 10;
  k.alpha1 = -1;
  EXPECT_THROW(k.validate(), InvalidInput);
}

TEST(Batch, Validation) {
  EXPECT_THROW((SequenceBatch{"a", {}}.validate()), InvalidInput);
  EXPECT_THROW((SequenceBatch{"a", {3, 0}}.validate()), InvalidInput);
  EXPECT_THROW((SequenceBatch{"a", {3, 9}}.validate(8)), InvalidInput);
  EXPECT_NO_THROW((SequenceBatch{"a", {3, 8}}.validate(8)));
  EXPECT_EQ((SequenceBatch{"a", {3, 8}}.total_tokens()), 11);
}

TEST(Batch, DropOverlong) {
  const auto b = drop_overlong({"x", {5, 20, 7, 30}}, 10);
  EXPECT_EQ(b.batch_id, "x");
  EXPECT_EQ(b.lengths, (std::vector<Tokens>{5, 7}));
}

SelectedGroup group(int degree, int seqs) {
  SelectedGroup g;
  g.degree = degree;
  for (int i = 0; i < seqs; ++i) g.sequences.push_back(i);
  return g;
}

TEST(GroupsSummary, Notation) {
  MicroBatchPlan mb;
  mb.selected_groups = {group(32, 1), group(8, 1), group(8, 1), group(8, 2), group(8, 1)};
  EXPECT_EQ(groups_summary(mb), "⟨32,8×4⟩");

  MicroBatchPlan other;
  other.selected_groups = {group(32, 3), group(16, 1), group(4, 0)};
  EXPECT_EQ(groups_summary(other), "⟨32,16⟩");

  Plan plan;
  plan.micro_batches = {mb, mb, other};
  EXPECT_EQ(groups_summary(plan), "⟨32,8×4⟩×2 ⟨32,16⟩");
}

TEST(PowerOfTwo, Basics) {
  EXPECT_TRUE(is_power_of_two(1));
  EXPECT_TRUE(is_power_of_two(64));
  EXPECT_FALSE(is_power_of_two(0));
  EXPECT_FALSE(is_power_of_two(12));
  EXPECT_FALSE(is_power_of_two(-4));
}

}  // namespace
}  // namespace hetsp
