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

#include "hetsp/domain.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace hetsp {

bool is_power_of_two(std::int64_t value) {
  return value > 0 && (value & (value - 1)) == 0;
}

void ClusterSpec::validate() const {
  if (!is_power_of_two(total_devices)) {
    throw InvalidInput("cluster: total_devices must be a power of two, got " +
                       std::to_string(total_devices));
  }
  if (devices_per_node <= 0 || devices_per_node > total_devices ||
      total_devices % devices_per_node != 0) {
    throw InvalidInput("cluster: devices_per_node must divide total_devices");
  }
  if (!(inter_node_bandwidth > 0.0) || !(intra_node_bandwidth > 0.0)) {
    throw InvalidInput("cluster: bandwidths must be positive");
  }
  if (intra_node_bandwidth < inter_node_bandwidth) {
    throw InvalidInput("cluster: intra_node_bandwidth < inter_node_bandwidth");
  }
  if (memory_budget <= 0) {
    throw InvalidInput("cluster: memory_budget must be positive");
  }
}

void CostCoefficients::validate() const {
  const double values[] = {alpha1, alpha2, beta1, alpha3, beta2, zero_overhead};
  for (double v : values) {
    if (!(v >= 0.0)) throw InvalidInput("coeffs: coefficients must be non-negative");
  }
  if (m_token < 0 || m_ms < 0) {
    throw InvalidInput("coeffs: memory terms must be non-negative");
  }
}

void CostCoefficients::validate(const ClusterSpec& cluster) const {
  validate();
  if (m_ms >= cluster.memory_budget) {
    throw InvalidInput("coeffs: m_ms must be below the device memory budget");
  }
  if (m_token <= 0) {
    throw InvalidInput("coeffs: m_token must be positive to size activations");
  }
}

Tokens CostCoefficients::device_token_capacity(const ClusterSpec& cluster) const {
  if (m_token <= 0) return 0;
  const Bytes free = cluster.memory_budget - m_ms;
  return free <= 0 ? 0 : free / m_token;
}

Tokens SequenceBatch::total_tokens() const {
  return std::accumulate(lengths.begin(), lengths.end(), Tokens{0});
}

void SequenceBatch::validate(Tokens max_len) const {
  if (lengths.empty()) throw InvalidInput("batch '" + batch_id + "' is empty");
  for (Tokens s : lengths) {
    if (s < 1) throw InvalidInput("batch '" + batch_id + "' has a non-positive length");
    if (max_len > 0 && s > max_len) {
      throw InvalidInput("batch '" + batch_id + "' has a sequence of " +
                         std::to_string(s) + " tokens above the context limit " +
                         std::to_string(max_len));
    }
  }
}

SequenceBatch drop_overlong(const SequenceBatch& batch, Tokens max_len) {
  SequenceBatch out{batch.batch_id, {}};
  std::copy_if(batch.lengths.begin(), batch.lengths.end(),
               std::back_inserter(out.lengths),
               [&](Tokens s) { return max_len <= 0 || s <= max_len; });
  return out;
}

VirtualGroupCatalog build_virtual_catalog(const ClusterSpec& cluster) {
  cluster.validate();
  VirtualGroupCatalog catalog;
  int slot_id = 0;
  for (int degree = cluster.total_devices; degree >= 1; degree /= 2) {
    const double bw = degree <= cluster.devices_per_node
                          ? cluster.intra_node_bandwidth
                          : cluster.inter_node_bandwidth;
    for (int i = 0; i < cluster.total_devices / degree; ++i) {
      catalog.slots.push_back(GroupSlot{slot_id++, degree, bw});
    }
  }
  return catalog;
}

int BucketSet::total_count() const {
  return std::accumulate(counts.begin(), counts.end(), 0);
}

const SelectedGroup* MicroBatchPlan::critical_group() const {
  const SelectedGroup* best = nullptr;
  double best_time = -1.0;
  for (const auto& g : selected_groups) {
    const double t = g.breakdown.comp_time + g.breakdown.comm_time;
    if (t > best_time) {
      best_time = t;
      best = &g;
    }
  }
  return best;
}

std::string groups_summary(const MicroBatchPlan& micro_batch) {
  // degree -> number of non-empty groups, printed by degree descending.
  std::map<int, int, std::greater<>> per_degree;
  for (const auto& g : micro_batch.selected_groups) {
    if (!g.sequences.empty()) ++per_degree[g.degree];
  }
  std::ostringstream os;
  os << "⟨";
  bool first = true;
  for (const auto& [degree, count] : per_degree) {
    if (!first) os << ',';
    first = false;
    os << degree;
    if (count > 1) os << "×" << count;
  }
  os << "⟩";
  return os.str();
}

std::string groups_summary(const Plan& plan) {
  std::ostringstream os;
  std::size_t i = 0;
  bool first = true;
  while (i < plan.micro_batches.size()) {
    const std::string current = groups_summary(plan.micro_batches[i]);
    std::size_t run = 1;
    while (i + run < plan.micro_batches.size() &&
           groups_summary(plan.micro_batches[i + run]) == current) {
      ++run;
    }
    if (!first) os << ' ';
    first = false;
    os << current;
    if (run > 1) os << "×" << run;
    i += run;
  }
  return os.str();
}

}  // namespace hetsp
