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

#include "hetsp/blaster.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace hetsp {

namespace {

constexpr Tokens kInf = std::numeric_limits<Tokens>::max() / 4;

struct SortedBatch {
  std::vector<int> order;
  std::vector<Tokens> prefix{0};
};

SortedBatch sort_batch(const SequenceBatch& batch) {
  SortedBatch out;
  out.order.resize(batch.lengths.size());
  std::iota(out.order.begin(), out.order.end(), 0);
  std::stable_sort(out.order.begin(), out.order.end(), [&](int a, int b) {
    return batch.lengths[a] < batch.lengths[b];
  });
  for (int idx : out.order) out.prefix.push_back(out.prefix.back() + batch.lengths[idx]);
  return out;
}

MicroBatchSplit make_split(const SortedBatch& sorted, std::vector<int> boundaries) {
  MicroBatchSplit split;
  split.sorted_order = sorted.order;
  split.boundaries = std::move(boundaries);
  for (std::size_t i = 1; i < split.boundaries.size(); ++i) {
    const int lo = split.boundaries[i - 1];
    const int hi = split.boundaries[i];
    split.micro_batches.emplace_back(sorted.order.begin() + lo, sorted.order.begin() + hi);
    split.minimax_tokens = std::max(split.minimax_tokens, sorted.prefix[hi] - sorted.prefix[lo]);
  }
  return split;
}

void check_count(const SequenceBatch& batch, int count) {
  batch.validate();
  if (count < 1) throw InvalidInput("blast: micro-batch count must be >= 1");
  if (static_cast<std::size_t>(count) > batch.lengths.size()) {
    throw InvalidInput("blast: micro-batch count " + std::to_string(count) +
                       " exceeds the number of sequences " +
                       std::to_string(batch.lengths.size()));
  }
}

}  // namespace

Tokens cluster_token_capacity(const ClusterSpec& cluster, const CostCoefficients& coeffs,
                              std::optional<Tokens> override_capacity) {
  if (override_capacity) return *override_capacity;
  return static_cast<Tokens>(cluster.total_devices) * coeffs.device_token_capacity(cluster);
}

int min_microbatch_count(const SequenceBatch& batch, const ClusterSpec& cluster,
                         const CostCoefficients& coeffs,
                         std::optional<Tokens> override_capacity) {
  const Tokens capacity = cluster_token_capacity(cluster, coeffs, override_capacity);
  if (capacity <= 0) {
    throw Infeasible("cluster token capacity is zero: no activation memory left after "
                     "model states");
  }
  const Tokens total = batch.total_tokens();
  return static_cast<int>(std::max<Tokens>(1, (total + capacity - 1) / capacity));
}

MicroBatchSplit blast(const SequenceBatch& batch, int count) {
  check_count(batch, count);
  const SortedBatch sorted = sort_batch(batch);
  const int k_total = static_cast<int>(sorted.order.size());
  const auto& prefix = sorted.prefix;

  // dp[i][k]: smallest achievable max part sum for the first k sequences
  // split into i parts.
  std::vector<std::vector<Tokens>> dp(count + 1, std::vector<Tokens>(k_total + 1, kInf));
  dp[0][0] = 0;
  for (int i = 1; i <= count; ++i) {
    for (int k = i; k <= k_total - (count - i); ++k) {
      Tokens best = kInf;
      for (int j = i - 1; j <= k - 1; ++j) {
        if (dp[i - 1][j] >= kInf) continue;
        best = std::min(best, std::max(dp[i - 1][j], prefix[k] - prefix[j]));
      }
      dp[i][k] = best;
    }
  }
  const Tokens optimum = dp[count][k_total];

  // Fewest parts of size <= optimum that cover each suffix, for the
  // front-to-back reconstruction of the lexicographically smallest cuts.
  std::vector<int> min_parts(k_total + 1, 0);
  for (int b = 0; b < k_total; ++b) {
    int parts = 0;
    int pos = b;
    while (pos < k_total) {
      int end = pos;
      while (end < k_total && prefix[end + 1] - prefix[pos] <= optimum) ++end;
      ++parts;
      pos = end;
    }
    min_parts[b] = parts;
  }

  std::vector<int> boundaries{0};
  int start = 0;
  for (int remaining = count; remaining >= 1; --remaining) {
    if (remaining == 1) {
      boundaries.push_back(k_total);
      break;
    }
    for (int end = start + 1; end < k_total; ++end) {
      if (prefix[end] - prefix[start] > optimum) break;
      const int rest_len = k_total - end;
      if (min_parts[end] <= remaining - 1 && remaining - 1 <= rest_len) {
        boundaries.push_back(end);
        start = end;
        break;
      }
    }
  }
  return make_split(sorted, std::move(boundaries));
}

MicroBatchSplit blast_bruteforce(const SequenceBatch& batch, int count) {
  check_count(batch, count);
  if (batch.lengths.size() > 14) throw InvalidInput("blast_bruteforce: at most 14 sequences");
  const SortedBatch sorted = sort_batch(batch);
  const int k_total = static_cast<int>(sorted.order.size());

  // Cut sets in lexicographic order; the first strict improvement wins ties.
  std::vector<int> cuts(count - 1);
  std::iota(cuts.begin(), cuts.end(), 1);
  Tokens best = kInf;
  std::vector<int> best_boundaries;
  for (;;) {
    std::vector<int> boundaries{0};
    boundaries.insert(boundaries.end(), cuts.begin(), cuts.end());
    boundaries.push_back(k_total);
    Tokens worst = 0;
    for (std::size_t i = 1; i < boundaries.size(); ++i) {
      worst = std::max(worst, sorted.prefix[boundaries[i]] - sorted.prefix[boundaries[i - 1]]);
    }
    if (worst < best) {
      best = worst;
      best_boundaries = boundaries;
    }
    // Next combination of count-1 values from [1, K-1].
    int i = count - 2;
    while (i >= 0 && cuts[i] == k_total - 1 - (count - 2 - i)) --i;
    if (i < 0) break;
    ++cuts[i];
    for (int j = i + 1; j < count - 1; ++j) cuts[j] = cuts[j - 1] + 1;
  }
  return make_split(sorted, std::move(best_boundaries));
}

}  // namespace hetsp
