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

#include "hetsp/baselines.hpp"

#include <algorithm>
#include <numeric>

#include "hetsp/cost_model.hpp"

namespace hetsp {

std::vector<std::vector<int>> bfd_pack_indices(std::span<const Tokens> lengths, Tokens capacity) {
  std::vector<int> order(lengths.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return lengths[a] > lengths[b]; });
  std::vector<std::vector<int>> packs;
  std::vector<Tokens> load;
  for (int idx : order) {
    const Tokens s = lengths[idx];
    if (s > capacity) {
      throw InvalidInput("bfd_pack: length " + std::to_string(s) + " exceeds capacity " +
                         std::to_string(capacity));
    }
    int best = -1;
    for (std::size_t k = 0; k < packs.size(); ++k) {
      if (load[k] + s <= capacity && (best < 0 || load[k] > load[best])) best = static_cast<int>(k);
    }
    if (best < 0) {
      packs.emplace_back();
      load.push_back(0);
      best = static_cast<int>(packs.size()) - 1;
    }
    packs[best].push_back(idx);
    load[best] += s;
  }
  return packs;
}

std::vector<std::vector<Tokens>> bfd_pack(std::span<const Tokens> lengths, Tokens capacity) {
  std::vector<std::vector<Tokens>> out;
  for (const auto& pack : bfd_pack_indices(lengths, capacity)) {
    std::vector<Tokens> values;
    for (int idx : pack) values.push_back(lengths[idx]);
    out.push_back(std::move(values));
  }
  return out;
}

Tokens static_capacity(int degree, const ClusterSpec& cluster, const CostCoefficients& coeffs,
                       const BaselineOptions& options) {
  const Tokens memory_cap = static_cast<Tokens>(degree) * coeffs.device_token_capacity(cluster);
  return options.context_window ? std::min(*options.context_window, memory_cap) : memory_cap;
}

Plan plan_static(const SequenceBatch& batch, const ClusterSpec& cluster,
                 const CostCoefficients& coeffs, int degree, const BaselineOptions& options) {
  batch.validate();
  cluster.validate();
  coeffs.validate(cluster);
  if (!is_power_of_two(degree) || degree > cluster.total_devices) {
    throw InvalidInput("plan_static: degree " + std::to_string(degree) +
                       " must be a power of two <= " + std::to_string(cluster.total_devices));
  }
  const Tokens capacity = static_capacity(degree, cluster, coeffs, options);
  const Tokens longest = *std::max_element(batch.lengths.begin(), batch.lengths.end());
  if (longest > capacity) {
    throw Infeasible("plan_static: sequence of " + std::to_string(longest) +
                     " tokens exceeds SP=" + std::to_string(degree) + " capacity " +
                     std::to_string(capacity));
  }
  auto packs = bfd_pack_indices(batch.lengths, capacity);
  std::vector<Tokens> pack_tokens;
  for (const auto& pack : packs) {
    Tokens t = 0;
    for (int idx : pack) t += batch.lengths[idx];
    pack_tokens.push_back(t);
  }
  std::vector<int> pack_order(packs.size());
  std::iota(pack_order.begin(), pack_order.end(), 0);
  std::stable_sort(pack_order.begin(), pack_order.end(),
                   [&](int a, int b) { return pack_tokens[a] > pack_tokens[b]; });

  const VirtualGroupCatalog catalog = build_virtual_catalog(cluster);
  std::vector<const GroupSlot*> slots;
  for (const auto& slot : catalog.slots) {
    if (slot.degree == degree) slots.push_back(&slot);
  }
  const std::size_t groups = slots.size();

  Plan plan;
  plan.strategy = "static";
  plan.batch_id = batch.batch_id;
  plan.static_degree = degree;
  for (std::size_t first = 0; first < pack_order.size(); first += groups) {
    MicroBatchPlan wave;
    wave.group_selection.assign(catalog.size(), 0);
    const std::size_t last = std::min(pack_order.size(), first + groups);
    for (std::size_t k = first; k < last; ++k) {
      const GroupSlot& slot = *slots[k - first];
      auto members = packs[pack_order[k]];
      GroupLoad load{{}, slot.degree, slot.bandwidth};
      for (int idx : members) load.token_lengths.push_back(batch.lengths[idx]);
      SelectedGroup group{slot.slot_id, slot.degree, slot.bandwidth, members, {}};
      group.breakdown.comp_time = comp_time(load, coeffs);
      group.breakdown.comm_time = comm_time(load, coeffs);
      group.breakdown.memory_bytes = memory_bytes(load, coeffs);
      group.breakdown.true_time = group_time(load, coeffs);
      group.breakdown.true_memory_bytes = group.breakdown.memory_bytes;
      wave.predicted_makespan = std::max(wave.predicted_makespan, group.breakdown.true_time);
      if (group.breakdown.memory_bytes > cluster.memory_budget) wave.plan_warning = true;
      wave.group_selection[slot.slot_id] = 1;
      wave.sequence_indices.insert(wave.sequence_indices.end(), members.begin(), members.end());
      wave.selected_groups.push_back(std::move(group));
    }
    std::sort(wave.sequence_indices.begin(), wave.sequence_indices.end());
    plan.predicted_total_time += wave.predicted_makespan;
    plan.micro_batches.push_back(std::move(wave));
  }
  return plan;
}

std::vector<int> feasible_static_degrees(const SequenceBatch& batch, const ClusterSpec& cluster,
                                         const CostCoefficients& coeffs,
                                         const BaselineOptions& options) {
  batch.validate();
  const Tokens longest = *std::max_element(batch.lengths.begin(), batch.lengths.end());
  std::vector<int> out;
  for (int d = 1; d <= cluster.total_devices; d *= 2) {
    if (longest <= static_capacity(d, cluster, coeffs, options)) out.push_back(d);
  }
  return out;
}

Plan plan_batch_ada(const SequenceBatch& batch, const ClusterSpec& cluster,
                    const CostCoefficients& coeffs, const BaselineOptions& options) {
  const auto degrees = feasible_static_degrees(batch, cluster, coeffs, options);
  if (degrees.empty()) {
    throw Infeasible("plan_batch_ada: no homogeneous degree fits the longest sequence");
  }
  Plan best;
  bool have = false;
  for (int d : degrees) {
    Plan candidate = plan_static(batch, cluster, coeffs, d, options);
    if (!have || candidate.predicted_total_time < best.predicted_total_time) {
      best = std::move(candidate);
      have = true;
    }
  }
  best.strategy = "batch_ada";
  return best;
}

}  // namespace hetsp
