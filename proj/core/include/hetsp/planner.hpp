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

#ifndef HETSP_PLANNER_HPP_
#define HETSP_PLANNER_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hetsp/domain.hpp"

namespace hetsp {

namespace lp {
struct Model;
}

struct PlannerOptions {
  bool strict_device_equality = false;  // sum d*m == N instead of <= N
  bool symmetry_breaking = true;
  // Link every (bucket, slot) pair as A <= b * m instead of one aggregated
  // row per slot. Same integer solutions; larger relaxation.
  bool pairwise_links = false;
  std::optional<double> time_limit;     // seconds of wall time
  long node_limit = 200000;
  int max_degree = 0;       // 0: no limit
  int degree_divisor = 0;   // e.g. attention heads; 0: no constraint
  // Restricts selection to these slot ids (others forced to m = 0).
  std::optional<std::vector<int>> allowed_slots;

  bool operator==(const PlannerOptions&) const = default;
};

// One micro-batch's MILP. Bucket member indices refer to the global batch.
struct MilpInstance {
  VirtualGroupCatalog catalog;
  BucketSet buckets;
  CostCoefficients coeffs;
  ClusterSpec cluster;
  PlannerOptions options;

  int bucket_count() const { return static_cast<int>(buckets.size()); }
  int slot_count() const { return static_cast<int>(catalog.size()); }
  // Degree restrictions from the options; does not look at memory.
  bool slot_allowed(int p) const;

  bool operator==(const MilpInstance&) const = default;
};

inline constexpr const char* kStatusOptimal = "optimal";
inline constexpr const char* kStatusInfeasible = "infeasible";
inline constexpr const char* kStatusIncumbent = "time_limit_incumbent";
inline constexpr const char* kStatusNoSolution = "time_limit_no_solution";

struct MilpSolution {
  std::vector<int> m;               // P entries
  std::vector<std::vector<int>> A;  // Q x P
  double objective = 0.0;           // C, seconds
  std::string status = kStatusInfeasible;
  std::string infeasible_family;    // "memory" | "coverage" when infeasible
  long node_count = 0;
  double wall_time = 0.0;

  bool has_solution() const {
    return status == kStatusOptimal || status == kStatusIncumbent;
  }
};

MilpInstance build_instance(const BucketSet& buckets, const VirtualGroupCatalog& catalog,
                            const CostCoefficients& coeffs, const ClusterSpec& cluster,
                            const PlannerOptions& options = {});

// Exact check of a candidate (m, A) against every constraint family, using
// integer memory arithmetic and cost-model group times.
struct Evaluation {
  bool feasible = false;
  std::string violated;  // first violated family: "binary", "linking",
                         // "coverage", "devices", "memory", "degree"
  double makespan = 0.0;
};
Evaluation evaluate(const MilpInstance& instance, const std::vector<int>& m,
                    const std::vector<std::vector<int>>& A);

// The linear model handed to branch-and-bound, after presolve. Exposed for
// dumps and tests.
lp::Model build_model(const MilpInstance& instance);
std::vector<std::string> describe_constraints(const MilpInstance& instance);

// Branch-and-bound over the LP relaxation. Deterministic; single-threaded.
MilpSolution solve(const MilpInstance& instance);

// Exhaustive enumeration; P <= 7, Q <= 3, total bucket count <= 6.
MilpSolution solve_bruteforce(const MilpInstance& instance);

// Dispatches real sequences to the selected groups. Within a bucket,
// sequences go longest-first to the group with the most remaining assigned
// count (ties: lowest slot). Throws Infeasible if the solution has none.
MicroBatchPlan extract_plan(const MilpSolution& solution, const MilpInstance& instance,
                            std::span<const Tokens> original_lengths);

}  // namespace hetsp

#endif  // HETSP_PLANNER_HPP_
