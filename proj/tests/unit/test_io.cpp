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

#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hetsp/bucketing.hpp"
#include "hetsp/io.hpp"
#include "hetsp/planner.hpp"
#include "hetsp/simulator.hpp"
#include "hetsp/workflow.hpp"
#include "oracles.hpp"

namespace hetsp {
namespace {

TEST(Json, ClusterRoundTrip) {
  const auto c = oracle::two_length_cluster();
  const std::string text = io::to_json(c);
  EXPECT_EQ(text.back(), '\n');
  EXPECT_EQ(io::cluster_from_json(text), c);
}

TEST(Json, CoefficientsRoundTrip) {
  auto k = oracle::two_length_coeffs();
  k.beta1 = 0.125;
  k.zero_overhead = 1.0 / 3.0;
  EXPECT_EQ(io::coeffs_from_json(io::to_json(k)), k);
}

TEST(Json, RejectsUnknownAndMissingFields) {
  EXPECT_THROW(io::cluster_from_json(R"({"total_devices": 8})"), InvalidInput);
  const std::string extra =
      R"({"total_devices": 8, "devices_per_node": 8, "intra_node_bandwidth": 1,
          "inter_node_bandwidth": 1, "memory_budget": 10, "gpus": 3})";
  EXPECT_THROW(io::cluster_from_json(extra), InvalidInput);
  EXPECT_THROW(io::cluster_from_json("{not json"), InvalidInput);
  EXPECT_THROW(io::coeffs_from_json(R"({"alpha1": 1})"), InvalidInput);
}

TEST(Json, CoefficientsOverheadIsOptional) {
  const std::string text =
      R"({"alpha1": 0, "alpha2": 1, "beta1": 0, "alpha3": 2, "beta2": 0,
          "m_token": 4, "m_ms": 100})";
  const auto k = io::coeffs_from_json(text);
  EXPECT_EQ(k.zero_overhead, 0.0);
  EXPECT_EQ(k.m_token, 4);
}

TEST(Json, BucketsRoundTrip) {
  const std::vector<Tokens> lengths{1, 2, 3, 10};
  const auto b = bucket_dp(lengths, 2);
  EXPECT_EQ(io::buckets_from_json(io::to_json(b)), b);
}

TEST(Json, PlanRoundTrip) {
  ClusterSpec c{8, 4, 4.0, 1.0, 100 + 1000};
  CostCoefficients k;
  k.alpha1 = 1e-5;
  k.alpha2 = 0.01;
  k.alpha3 = 0.3;
  k.m_token = 1;
  k.m_ms = 100;
  WorkflowConfig config;
  config.planner.node_limit = 100;
  const Plan p = solve_batch({"rt", {900, 20, 3000, 451, 77, 1200, 6000}}, c, k, config);
  const std::string text = io::to_json(p);
  EXPECT_NE(text.find("\"schema\": 1"), std::string::npos);
  const Plan back = io::plan_from_json(text);
  EXPECT_EQ(back, p);
  EXPECT_EQ(io::to_json(back), text);
}

TEST(Json, PlanSchemaMismatchRejected) {
  Plan p;
  p.batch_id = "x";
  std::string text = io::to_json(p);
  text.replace(text.find("\"schema\": 1"), 11, "\"schema\": 2");
  EXPECT_THROW(io::plan_from_json(text), InvalidInput);
}

TEST(Json, MilpDumpListsConstraintRows) {
  ClusterSpec c{2, 2, 1.0, 1.0, 20};
  CostCoefficients k;
  k.alpha2 = 1;
  k.m_token = 1;
  k.m_ms = 10;
  BucketSet b;
  b.upper_limits = {5};
  b.counts = {2};
  b.member_indices = {{0, 1}};
  const auto inst = build_instance(b, build_virtual_catalog(c), k, c);
  const auto sol = solve(inst);
  const std::string text = io::to_json(inst, sol);
  EXPECT_NE(text.find("cover[q0]"), std::string::npos);
  EXPECT_NE(text.find("\"status\": \"optimal\""), std::string::npos);
}

TEST(Lengths, PlainAndJsonl) {
  EXPECT_EQ(io::parse_lengths("3\n\n 7 \n100\n"), (std::vector<Tokens>{3, 7, 100}));
  EXPECT_EQ(io::parse_lengths("{\"length\": 4}\n{\"length\": 9}\n"), (std::vector<Tokens>{4, 9}));
  EXPECT_THROW(io::parse_lengths("3\nabc\n"), InvalidInput);
  EXPECT_THROW(io::parse_lengths("3.5\n"), InvalidInput);
  EXPECT_THROW(io::parse_lengths("\n\n"), InvalidInput);
}

TEST(Batches, JsonlRoundTrip) {
  const std::vector<SequenceBatch> batches{{"a", {1, 2, 3}}, {"b", {40}}};
  const std::string text = io::batches_to_jsonl(batches);
  EXPECT_EQ(text.back(), '\n');
  EXPECT_EQ(io::parse_batches(text), batches);
}

TEST(Batches, LengthsFileIsOneBatch) {
  const auto batches = io::parse_batches("5\n6\n", "fig");
  ASSERT_EQ(batches.size(), 1u);
  EXPECT_EQ(batches[0], (SequenceBatch{"fig", {5, 6}}));
  EXPECT_THROW(io::parse_batches("{\"batch_id\": \"x\", \"lengths\": []}\n"), InvalidInput);
}

TEST(Profile, CsvRoundTrip) {
  const auto records = oracle::synthetic_profile(oracle::profile_truth(), 5, 0.02, 1);
  const std::string text = io::profile_to_csv(records);
  const auto back = io::parse_profile_csv(text);
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(back[i].token_lengths, records[i].token_lengths);
    EXPECT_EQ(back[i].degree, records[i].degree);
    EXPECT_EQ(back[i].bandwidth, records[i].bandwidth);
    EXPECT_EQ(back[i].measured_comp_time, records[i].measured_comp_time);
    EXPECT_EQ(back[i].measured_comm_time, records[i].measured_comm_time);
    EXPECT_EQ(back[i].measured_peak_memory, records[i].measured_peak_memory);
  }
}

TEST(Profile, AcceptsSpaceSeparatedTokens) {
  const auto r = io::parse_profile_csv(
      "tokens;degree;bandwidth;comp_s;comm_s;mem_bytes\n100 200;2;1e9;0.5;0.1;1000\n");
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].token_lengths, (std::vector<Tokens>{100, 200}));
  EXPECT_THROW(io::parse_profile_csv("tokens;degree\n1;2\n"), InvalidInput);
  EXPECT_THROW(io::parse_profile_csv(
                   "tokens;degree;bandwidth;comp_s;comm_s;mem_bytes\n1;2;x;0;0;0\n"),
               InvalidInput);
}

TEST(Report, FixedColumnOrder) {
  SimReport r;
  r.strategies = {"flexsp"};
  SimRow row;
  row.strategy = "flexsp";
  row.predicted_time = 1.5;
  row.comp_time = 1.0;
  row.comm_time = 0.5;
  row.micro_batch_count = 1;
  row.groups = "⟨32,8×4⟩";
  r.rows = {row};
  EXPECT_EQ(io::report_csv(r),
            "iteration,strategy,feasible,predicted_time,comp_time,comm_time,overhead_time,"
            "micro_batch_count,groups\n0,flexsp,1,1.5,1,0.5,0,1,\"⟨32,8×4⟩\"\n");
}

TEST(Files, WriteThenRead) {
  const auto path = std::filesystem::temp_directory_path() / "hetsp_io_test.txt";
  io::write_file(path.string(), "abc\n");
  EXPECT_EQ(io::read_file(path.string()), "abc\n");
  std::filesystem::remove(path);
  EXPECT_THROW(io::read_file("/nonexistent/hetsp/file"), InvalidInput);
}

}  // namespace
}  // namespace hetsp
