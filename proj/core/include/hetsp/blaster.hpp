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

#ifndef HETSP_BLASTER_HPP_
#define HETSP_BLASTER_HPP_

#include <optional>

#include "hetsp/domain.hpp"

namespace hetsp {

// A split of the length-sorted batch into contiguous micro-batches.
struct MicroBatchSplit {
  std::vector<int> sorted_order;              // batch indices, ascending length
  std::vector<int> boundaries;                // j_0 = 0 < j_1 < ... < j_M = K
  std::vector<std::vector<int>> micro_batches;  // batch indices per micro-batch
  Tokens minimax_tokens = 0;

  int count() const { return static_cast<int>(micro_batches.size()); }
};

// N * floor((E - M_ms) / M_token), unless `override_capacity` is set.
Tokens cluster_token_capacity(const ClusterSpec& cluster, const CostCoefficients& coeffs,
                              std::optional<Tokens> override_capacity = std::nullopt);

// ceil(total tokens / cluster token capacity), at least 1. Throws Infeasible
// when the capacity is not positive.
int min_microbatch_count(const SequenceBatch& batch, const ClusterSpec& cluster,
                         const CostCoefficients& coeffs,
                         std::optional<Tokens> override_capacity = std::nullopt);

// Sorts ascending (stable) and splits into exactly `count` contiguous parts
// minimizing the largest per-part token sum. Ties go to the lexicographically
// smallest boundary vector. Throws InvalidInput when count > K.
MicroBatchSplit blast(const SequenceBatch& batch, int count);

// Enumerates all C(K-1, M-1) cut sets; K <= 14.
MicroBatchSplit blast_bruteforce(const SequenceBatch& batch, int count);

}  // namespace hetsp

#endif  // HETSP_BLASTER_HPP_
