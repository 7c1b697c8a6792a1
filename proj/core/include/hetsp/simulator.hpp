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

#ifndef HETSP_SIMULATOR_HPP_
#define HETSP_SIMULATOR_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hetsp/workflow.hpp"

namespace hetsp {

// "flexsp", "batch_ada" or "static:<D>".
struct StrategySpec {
  std::string name;
  int degree = 0;  // static only

  std::string label() const;
  bool operator==(const StrategySpec&) const = default;
};
StrategySpec parse_strategy(std::string_view text);
std::vector<StrategySpec> parse_strategies(std::string_view comma_separated);

struct SimConfig {
  int warmup = 0;
  int iters = 0;  // measured iterations after warm-up; 0 means all
  WorkflowConfig workflow;
  std::optional<Tokens> context_window;  // baselines only
  bool charge_solve_time = false;        // add solve wall time / node count
};

struct SimRow {
  int iteration = 0;
  std::string strategy;
  bool feasible = true;
  double predicted_time = 0.0;
  double comm_time = 0.0;      // critical group per micro-batch, summed
  double comp_time = 0.0;
  double overhead_time = 0.0;  // constant overhead (+ charged solve time)
  int micro_batch_count = 0;
  std::string groups;
};

struct DegreeLength {
  int iteration = 0;
  int degree = 0;
  Tokens length = 0;

  bool operator==(const DegreeLength&) const = default;
};

struct SimReport {
  std::vector<SimRow> rows;           // iteration-major, strategy order as given
  std::vector<std::string> strategies;
  std::vector<double> mean_time;      // per strategy over measured iterations
  // Paired ratios over measured iterations where both sides are feasible.
  // Static degrees that fail on any measured iteration are not candidates
  // for the best static; NaN when there is no candidate.
  double speedup_vs_static = 0.0;     // best static / flexsp
  double speedup_vs_batch_ada = 0.0;
  std::vector<DegreeLength> degree_lengths;  // flexsp assignments, measured only
};

// Plans every batch with every strategy under one cost model. Strategies
// that cannot plan a batch produce a row with feasible = false that is left
// out of the means. Deterministic for any worker count.
SimReport run_sim(std::span<const SequenceBatch> batches, const ClusterSpec& cluster,
                  const CostCoefficients& coeffs, std::span<const StrategySpec> strategies,
                  const SimConfig& config = {});

struct LengthDistribution {
  enum class Kind { kLognormal, kPareto };
  Kind kind = Kind::kLognormal;
  double a = 8.0;  // mu | alpha
  double b = 1.0;  // sigma | floor

  bool operator==(const LengthDistribution&) const = default;
};
// "lognormal:MU,SIGMA" or "pareto:ALPHA,FLOOR".
LengthDistribution parse_distribution(std::string_view text);

// `batches` batches of `count` lengths each, rounded and clipped to
// [1, max_len]; std::mt19937_64 seeded once.
std::vector<SequenceBatch> gen_longtail(int batches, int count, const LengthDistribution& dist,
                                        Tokens max_len, std::uint64_t seed);

struct LengthSummary {
  std::size_t count = 0;
  double mean = 0.0;
  Tokens max = 0;
  double fraction_below_8k = 0.0;
  double fraction_above_32k = 0.0;
};
LengthSummary summarize_lengths(std::span<const SequenceBatch> batches);

// Histogram of assigned lengths (log2 bins) per degree, as a standalone SVG.
std::string degree_histogram_svg(const SimReport& report);

}  // namespace hetsp

#endif  // HETSP_SIMULATOR_HPP_
