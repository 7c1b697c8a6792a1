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
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hetsp/cli.hpp"
#include "hetsp/cost_model.hpp"
#include "hetsp/io.hpp"
#include "json.hpp"
#include "oracles.hpp"

namespace hetsp {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "hetsp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hetsp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string data(const std::string& name) const {
    return (fs::path(HETSP_DATA_DIR) / name).string();
  }
  fs::path dir_;
};

void expect_single_error_line(const CliRun& r, const std::string& kind) {
  EXPECT_EQ(r.err.rfind("error: " + kind + ": ", 0), 0u) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << r.err;
}

TEST_F(CliTest, BucketExample) {
  io::write_file(path("l.txt"), "1\n2\n3\n10\n");
  const CliRun r = run({"bucket", "--lengths", path("l.txt"), "--q", "2", "--method", "dp",
                     "--out", path("b.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(io::read_file(path("b.json")));
  EXPECT_EQ(j["upper_limits"], nlohmann::json::parse("[3, 10]"));
  EXPECT_EQ(j["total_error"], 3);
  const CliRun naive = run({"bucket", "--lengths", path("l.txt"), "--q", "2", "--method", "naive",
                         "--out", path("n.json")});
  ASSERT_EQ(naive.code, 0);
  EXPECT_EQ(io::buckets_from_json(io::read_file(path("n.json"))).total_error, 9);
}

TEST_F(CliTest, FitNoiseFreeProfile) {
  const auto records = oracle::synthetic_profile(oracle::profile_truth(), 30, 0.0, 2);
  io::write_file(path("p.csv"), io::profile_to_csv(records));
  const CliRun r = run({"fit", "--profile", path("p.csv"), "--out", path("k.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("max_rel_err=", 0), 0u) << r.out;
  const double err = std::stod(r.out.substr(12));
  EXPECT_LT(err, 1e-12);
  const auto k = io::coeffs_from_json(io::read_file(path("k.json")));
  EXPECT_NEAR(k.alpha3, oracle::profile_truth().alpha3, 1e-6 * k.alpha3);
}

TEST_F(CliTest, PlanTwoLengthExample) {
  const CliRun r = run({"plan", "--lengths", data("two_length_lengths.txt"), "--cluster",
                     data("two_length_cluster.json"), "--coeffs", data("two_length_coeffs.json"), "--out",
                     path("plan.json"), "--dump-milp", "--metrics", path("m.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Plan plan = io::plan_from_json(io::read_file(path("plan.json")));
  EXPECT_EQ(groups_summary(plan), "⟨32,8×4⟩");
  const auto j = nlohmann::json::parse(io::read_file(path("plan.json")));
  EXPECT_EQ(j["groups"], "⟨32,8×4⟩");
  EXPECT_TRUE(fs::exists(path("plan.json.milp.json")));
  EXPECT_NE(io::read_file(path("plan.json.milp.json")).find("time["), std::string::npos);
  EXPECT_EQ(io::read_file(path("m.csv")).rfind("batch_id,", 0), 0u);
}

TEST_F(CliTest, PlanBaselinesAndCompare) {
  const auto base = std::vector<std::string>{"--lengths", data("two_length_lengths.txt"), "--cluster",
                                             data("two_length_cluster.json"), "--coeffs",
                                             data("two_length_coeffs.json")};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> args{"plan"};
    args.insert(args.end(), base.begin(), base.end());
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args);
  };
  fs::create_directories(path("plans"));
  ASSERT_EQ(with({"--out", path("plans/flex.json")}).code, 0);
  ASSERT_EQ(with({"--strategy", "static:32", "--out", path("plans/s32.json")}).code, 0);
  ASSERT_EQ(with({"--strategy", "batch_ada", "--out", path("plans/ada.json")}).code, 0);
  const CliRun r = run({"compare", "--plans", path("plans"), "--out", path("summary.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = io::read_file(path("summary.csv"));
  EXPECT_EQ(csv.rfind("file,batch_id,strategy,", 0), 0u);
  EXPECT_NE(csv.find("flex.json,b0,flexsp,0,1,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("s32.json,b0,static,32,1,"), std::string::npos) << csv;
}

TEST_F(CliTest, PlanManyBatchesWritesDirectory) {
  io::write_file(path("b.jsonl"), io::batches_to_jsonl(std::vector<SequenceBatch>{
                                      {"x", {48000, 1000}}, {"y", {20000, 20000, 30000}}}));
  const CliRun r = run({"plan", "--lengths", path("b.jsonl"), "--cluster",
                     data("two_length_cluster.json"), "--coeffs", data("two_length_coeffs.json"), "--out",
                     path("out"), "--jobs", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(io::plan_from_json(io::read_file(path("out/x.json"))).batch_id, "x");
  EXPECT_EQ(io::plan_from_json(io::read_file(path("out/y.json"))).batch_id, "y");
}

TEST_F(CliTest, InfeasibleExitsTwo) {
  io::write_file(path("l.txt"), "500000\n");
  const CliRun r = run({"plan", "--lengths", path("l.txt"), "--cluster", data("two_length_cluster.json"),
                     "--coeffs", data("two_length_coeffs.json"), "--out", path("p.json")});
  EXPECT_EQ(r.code, cli::kExitInfeasible);
  expect_single_error_line(r, "infeasible");
}

TEST_F(CliTest, BadInputExitsThree) {
  io::write_file(path("l.txt"), "12\nabc\n");
  CliRun r = run({"bucket", "--lengths", path("l.txt"), "--out", path("b.json")});
  EXPECT_EQ(r.code, cli::kExitInput);
  expect_single_error_line(r, "input");
  r = run({"bucket", "--lengths", path("missing.txt"), "--out", path("b.json")});
  EXPECT_EQ(r.code, cli::kExitInput);
  expect_single_error_line(r, "input");
  r = run({"bucket", "--q", "2"});
  EXPECT_EQ(r.code, cli::kExitInput);
  expect_single_error_line(r, "input");
  r = run({"frobnicate"});
  EXPECT_EQ(r.code, cli::kExitInput);
  io::write_file(path("c.json"), "{\"total_devices\": 8}\n");
  io::write_file(path("l2.txt"), "5\n");
  r = run({"plan", "--lengths", path("l2.txt"), "--cluster", path("c.json"), "--coeffs",
           data("two_length_coeffs.json"), "--out", path("p.json")});
  EXPECT_EQ(r.code, cli::kExitInput);
  expect_single_error_line(r, "input");
}

TEST_F(CliTest, GenThenSimulate) {
  CliRun r = run({"gen", "--dist", "lognormal:7,1", "--count", "12", "--batches", "3", "--max-len",
               "40000", "--seed", "9", "--out", path("g.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(io::parse_batches(io::read_file(path("g.jsonl"))).size(), 3u);
  r = run({"simulate", "--batches", path("g.jsonl"), "--cluster", data("two_length_cluster.json"),
           "--coeffs", data("two_length_coeffs.json"), "--strategies", "flexsp,batch_ada,static:8",
           "--out", path("r.csv"), "--degree-csv", path("d.csv"), "--svg", path("h.svg"),
           "--node-limit", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string report = io::read_file(path("r.csv"));
  EXPECT_EQ(std::count(report.begin(), report.end(), '\n'), 1 + 3 * 3);
  EXPECT_NE(r.out.find("speedup_vs_batch_ada="), std::string::npos);
  EXPECT_TRUE(fs::exists(path("d.csv")));
  EXPECT_TRUE(fs::exists(path("h.svg")));
}

TEST_F(CliTest, SimulateFromGeneratorSpec) {
  const CliRun a = run({"simulate", "--batches", "gen:lognormal:7,1:10:2:40000:5", "--cluster",
                     data("two_length_cluster.json"), "--coeffs", data("two_length_coeffs.json"),
                     "--strategies", "batch_ada", "--out", path("a.csv")});
  ASSERT_EQ(a.code, 0) << a.err;
  const CliRun b = run({"simulate", "--batches", "gen:lognormal:7,1:10:2:40000:5", "--cluster",
                     data("two_length_cluster.json"), "--coeffs", data("two_length_coeffs.json"),
                     "--strategies", "batch_ada", "--out", path("b.csv")});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(io::read_file(path("a.csv")), io::read_file(path("b.csv")));
  const CliRun bad = run({"simulate", "--batches", "gen:lognormal:7,1:10", "--cluster",
                       data("two_length_cluster.json"), "--coeffs", data("two_length_coeffs.json"), "--out",
                       path("c.csv")});
  EXPECT_EQ(bad.code, cli::kExitInput);
}

TEST_F(CliTest, HelpExitsZero) {
  const CliRun r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("plan"), std::string::npos);
}

}  // namespace
}  // namespace hetsp
