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

#include <benchmark/benchmark.h>

#include <vector>

#include "hetsp/blaster.hpp"
#include "hetsp/bucketing.hpp"
#include "hetsp/planner.hpp"
#include "hetsp/simulator.hpp"
#include "hetsp/workflow.hpp"
#include "oracles.hpp"

namespace {

std::vector<hetsp::Tokens> lengths(int count, std::uint64_t seed = 1) {
  hetsp::LengthDistribution dist;
  dist.a = 8.0;
  dist.b = 1.2;
  return hetsp::gen_longtail(1, count, dist, 131072, seed).front().lengths;
}

void BM_BucketDp(benchmark::State& state) {
  const auto xs = lengths(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(hetsp::bucket_dp(xs, 16));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BucketDp)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_Blast(benchmark::State& state) {
  const hetsp::SequenceBatch batch{"b", lengths(static_cast<int>(state.range(0)))};
  for (auto _ : state) benchmark::DoNotOptimize(hetsp::blast(batch, 8));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Blast)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

hetsp::ClusterSpec small_cluster() {
  auto c = hetsp::oracle::two_length_cluster();
  c.total_devices = 8;
  c.devices_per_node = 4;
  return c;
}

void BM_SolveMicroBatch(benchmark::State& state) {
  const auto cluster = small_cluster();
  const auto coeffs = hetsp::oracle::two_length_coeffs();
  hetsp::LengthDistribution dist;
  dist.a = 7.5;
  const auto batch = hetsp::gen_longtail(1, 12, dist, 40000, 3).front();
  const auto buckets = hetsp::bucket_dp(batch.lengths, static_cast<int>(state.range(0)));
  hetsp::PlannerOptions options;
  options.node_limit = 2000;
  const auto instance = hetsp::build_instance(buckets, hetsp::build_virtual_catalog(cluster),
                                              coeffs, cluster, options);
  for (auto _ : state) benchmark::DoNotOptimize(hetsp::solve(instance));
}
BENCHMARK(BM_SolveMicroBatch)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_SolveBatch(benchmark::State& state) {
  const auto cluster = small_cluster();
  const auto coeffs = hetsp::oracle::two_length_coeffs();
  hetsp::LengthDistribution dist;
  dist.a = 7.5;
  const auto batch = hetsp::gen_longtail(1, 32, dist, 48000, 5).front();
  hetsp::WorkflowConfig config;
  config.planner.node_limit = 300;
  config.trials = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hetsp::solve_batch(batch, cluster, coeffs, config));
}
BENCHMARK(BM_SolveBatch)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
