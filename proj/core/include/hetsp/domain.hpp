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

#ifndef HETSP_DOMAIN_HPP_
#define HETSP_DOMAIN_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hetsp {

// Sequence lengths are token counts; memory is whole bytes.
using Tokens = std::int64_t;
using Bytes = std::int64_t;

// Malformed or contract-violating input (bad JSON, invalid cluster, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A well-formed request that has no feasible plan under the memory budget.
class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Devices, node topology, bandwidth tiers and the per-device memory budget.
struct ClusterSpec {
  int total_devices = 1;
  int devices_per_node = 1;
  double intra_node_bandwidth = 1.0;  // bytes/s
  double inter_node_bandwidth = 1.0;  // bytes/s
  Bytes memory_budget = 1;            // bytes per device

  // Throws InvalidInput unless N is a power of two, g divides N, bandwidths
  // are positive with intra >= inter, and the budget is positive.
  void validate() const;

  bool operator==(const ClusterSpec&) const = default;
};

// Profiled coefficients of the alpha-beta time model and the memory model.
struct CostCoefficients {
  double alpha1 = 0.0;  // s / token^2, attention term
  double alpha2 = 0.0;  // s / token, linear compute term
  double beta1 = 0.0;   // s, compute startup
  double alpha3 = 0.0;  // bytes / token moved by All-to-All
  double beta2 = 0.0;   // s, communication startup
  Bytes m_token = 0;    // activation bytes per token
  Bytes m_ms = 0;       // model-state bytes per device
  double zero_overhead = 0.0;  // s, constant sharded-DP overhead

  // Throws InvalidInput on negative coefficients.
  void validate() const;
  // Additionally requires m_ms < E and m_token > 0.
  void validate(const ClusterSpec& cluster) const;

  // Tokens one device can hold next to the model states:
  // floor((E - M_ms) / M_token).
  Tokens device_token_capacity(const ClusterSpec& cluster) const;

  bool operator==(const CostCoefficients&) const = default;
};

struct SequenceBatch {
  std::string batch_id;
  std::vector<Tokens> lengths;

  Tokens total_tokens() const;
  // Rejects empty batches, non-positive lengths, and (when max_len > 0)
  // lengths above the maximum context length.
  void validate(Tokens max_len = 0) const;

  bool operator==(const SequenceBatch&) const = default;
};

// Drops sequences longer than the maximum context length.
SequenceBatch drop_overlong(const SequenceBatch& batch, Tokens max_len);

struct GroupSlot {
  int slot_id = 0;
  int degree = 1;
  double bandwidth = 1.0;

  bool operator==(const GroupSlot&) const = default;
};

// Every candidate SP group the planner may select: N/d slots per power-of-two
// degree d, ordered by (degree desc, slot_id asc).
struct VirtualGroupCatalog {
  std::vector<GroupSlot> slots;

  std::size_t size() const { return slots.size(); }
  bool operator==(const VirtualGroupCatalog&) const = default;
};

VirtualGroupCatalog build_virtual_catalog(const ClusterSpec& cluster);

struct BucketSet {
  std::vector<Tokens> upper_limits;               // strictly increasing
  std::vector<int> counts;                        // members per bucket
  std::vector<std::vector<int>> member_indices;   // indices into the input
  Tokens total_error = 0;                         // sum of (limit - length)

  std::size_t size() const { return upper_limits.size(); }
  int total_count() const;
  bool operator==(const BucketSet&) const = default;
};

// Cost of one selected group as seen by the optimizer (bucketed lengths) and
// re-evaluated on the real sequence lengths.
struct GroupBreakdown {
  double comp_time = 0.0;
  double comm_time = 0.0;
  Bytes memory_bytes = 0;
  double true_time = 0.0;
  Bytes true_memory_bytes = 0;

  bool operator==(const GroupBreakdown&) const = default;
};

struct SelectedGroup {
  int slot_id = 0;
  int degree = 1;
  double bandwidth = 1.0;
  std::vector<int> sequences;  // indices into the global batch
  GroupBreakdown breakdown;

  bool operator==(const SelectedGroup&) const = default;
};

struct MicroBatchPlan {
  std::vector<int> sequence_indices;          // members, indices into the batch
  BucketSet buckets;                          // member_indices are batch indices
  std::vector<SelectedGroup> selected_groups;
  std::vector<int> group_selection;           // m, one 0/1 entry per slot
  std::vector<std::vector<int>> assignment;   // Q x P bucket counts
  double predicted_makespan = 0.0;            // C
  std::string status = "optimal";
  bool plan_warning = false;

  // Group with the largest time; ties go to the first listed.
  const SelectedGroup* critical_group() const;
  bool operator==(const MicroBatchPlan&) const = default;
};

struct Plan {
  int schema = 1;
  std::string strategy = "flexsp";  // "flexsp" | "static" | "batch_ada"
  std::string batch_id;
  int static_degree = 0;            // homogeneous degree for baselines
  std::vector<MicroBatchPlan> micro_batches;
  double predicted_total_time = 0.0;

  bool operator==(const Plan&) const = default;
};

// Table-style group summary, e.g. "⟨32,8×4⟩" or "⟨8×8⟩×2 ⟨32,16⟩".
// Consecutive micro-batches with identical group multisets are merged.
std::string groups_summary(const Plan& plan);
std::string groups_summary(const MicroBatchPlan& micro_batch);

bool is_power_of_two(std::int64_t value);

}  // namespace hetsp

#endif  // HETSP_DOMAIN_HPP_
