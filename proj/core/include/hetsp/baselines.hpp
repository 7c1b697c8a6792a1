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

#ifndef HETSP_BASELINES_HPP_
#define HETSP_BASELINES_HPP_

#include <optional>
#include <span>
#include <vector>

#include "hetsp/domain.hpp"

namespace hetsp {

// Best-fit decreasing: lengths sorted descending (stable), each placed into
// the fullest pack that still fits (ties: oldest pack), else a new pack.
// Throws InvalidInput when a length exceeds the capacity.
std::vector<std::vector<Tokens>> bfd_pack(std::span<const Tokens> lengths, Tokens capacity);
// Same packing, as indices into `lengths`.
std::vector<std::vector<int>> bfd_pack_indices(std::span<const Tokens> lengths, Tokens capacity);

struct BaselineOptions {
  // Fixed packing window; the memory-derived capacity still caps it.
  std::optional<Tokens> context_window;
};

// Pack capacity for homogeneous degree D.
Tokens static_capacity(int degree, const ClusterSpec& cluster, const CostCoefficients& coeffs,
                       const BaselineOptions& options = {});

// N/D groups of degree D; BFD packs dealt longest-first, round-robin, into
// waves of N/D packs. Each wave is one micro-batch. Throws Infeasible when a
// sequence exceeds the pack capacity.
Plan plan_static(const SequenceBatch& batch, const ClusterSpec& cluster,
                 const CostCoefficients& coeffs, int degree, const BaselineOptions& options = {});

// Degrees D for which plan_static is feasible, ascending.
std::vector<int> feasible_static_degrees(const SequenceBatch& batch, const ClusterSpec& cluster,
                                         const CostCoefficients& coeffs,
                                         const BaselineOptions& options = {});

// plan_static minimized over feasible D (ties: smaller D).
Plan plan_batch_ada(const SequenceBatch& batch, const ClusterSpec& cluster,
                    const CostCoefficients& coeffs, const BaselineOptions& options = {});

}  // namespace hetsp

#endif  // HETSP_BASELINES_HPP_
