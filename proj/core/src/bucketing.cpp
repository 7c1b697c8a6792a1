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

#include "hetsp/bucketing.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>

namespace hetsp {

__extension__ typedef __int128 Int128;

namespace {

constexpr Tokens kInf = std::numeric_limits<Tokens>::max() / 4;

void check_input(std::span<const Tokens> lengths, int max_buckets) {
  if (lengths.empty()) throw InvalidInput("bucketing: lengths must be non-empty");
  if (max_buckets < 1) throw InvalidInput("bucketing: bucket count must be >= 1");
  for (Tokens s : lengths) {
    if (s < 1) throw InvalidInput("bucketing: lengths must be positive");
  }
}

std::vector<int> sorted_order(std::span<const Tokens> lengths) {
  std::vector<int> order(lengths.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return lengths[a] < lengths[b]; });
  return order;
}

// Distinct sorted values with multiplicities and prefix sums over them.
struct DistinctView {
  std::vector<Tokens> value;
  std::vector<Tokens> count_prefix{0};
  std::vector<Tokens> token_prefix{0};

  explicit DistinctView(const std::vector<Tokens>& sorted) {
    for (Tokens s : sorted) {
      if (value.empty() || value.back() != s) {
        value.push_back(s);
        count_prefix.push_back(count_prefix.back());
        token_prefix.push_back(token_prefix.back());
      }
      ++count_prefix.back();
      token_prefix.back() += s;
    }
  }

  int size() const { return static_cast<int>(value.size()); }

  // Error of one bucket spanning distinct values [first, last].
  Tokens run_error(int first, int last) const {
    const Tokens members = count_prefix[last + 1] - count_prefix[first];
    const Tokens tokens = token_prefix[last + 1] - token_prefix[first];
    return value[last] * members - tokens;
  }
};

// Assembles a BucketSet from limits over the sorted order.
BucketSet assemble(std::span<const Tokens> lengths, const std::vector<int>& order,
                   const std::vector<Tokens>& limits) {
  BucketSet out;
  std::size_t pos = 0;
  for (Tokens limit : limits) {
    std::vector<int> members;
    while (pos < order.size() && lengths[order[pos]] <= limit) {
      members.push_back(order[pos]);
      out.total_error += limit - lengths[order[pos]];
      ++pos;
    }
    if (members.empty()) continue;
    out.upper_limits.push_back(limit);
    out.counts.push_back(static_cast<int>(members.size()));
    out.member_indices.push_back(std::move(members));
  }
  return out;
}

}  // namespace

BucketSet bucket_dp(std::span<const Tokens> lengths, int max_buckets) {
  check_input(lengths, max_buckets);
  const auto order = sorted_order(lengths);
  std::vector<Tokens> sorted(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = lengths[order[i]];
  const DistinctView view(sorted);
  const int n = view.size();
  const int q_max = std::min(max_buckets, n);

  // err[q][k]: best error covering the first k distinct values with q buckets.
  std::vector<std::vector<Tokens>> err(q_max + 1, std::vector<Tokens>(n + 1, kInf));
  err[0][0] = 0;
  for (int q = 1; q <= q_max; ++q) {
    for (int k = q; k <= n; ++k) {
      Tokens best = kInf;
      for (int j = q - 1; j < k; ++j) {
        if (err[q - 1][j] >= kInf) continue;
        best = std::min(best, err[q - 1][j] + view.run_error(j, k - 1));
      }
      err[q][k] = best;
    }
  }
  int q_best = 1;
  for (int q = 2; q <= q_max; ++q) {
    if (err[q][n] < err[q_best][n]) q_best = q;
  }

  // suffix[r][i]: best error covering distinct values [i, n) with r buckets;
  // drives the front-to-back reconstruction of the smallest limit vector.
  std::vector<std::vector<Tokens>> suffix(q_best + 1, std::vector<Tokens>(n + 1, kInf));
  suffix[0][n] = 0;
  for (int r = 1; r <= q_best; ++r) {
    for (int i = n - r; i >= 0; --i) {
      Tokens best = kInf;
      for (int e = i; e <= n - r; ++e) {
        if (suffix[r - 1][e + 1] >= kInf) continue;
        best = std::min(best, view.run_error(i, e) + suffix[r - 1][e + 1]);
      }
      suffix[r][i] = best;
    }
  }

  std::vector<Tokens> limits;
  Tokens remaining = err[q_best][n];
  int start = 0;
  for (int r = q_best; r >= 1; --r) {
    for (int e = start; e <= n - r; ++e) {
      const Tokens rest = suffix[r - 1][e + 1];
      if (rest < kInf && view.run_error(start, e) + rest == remaining) {
        limits.push_back(view.value[e]);
        remaining -= view.run_error(start, e);
        start = e + 1;
        break;
      }
    }
  }
  return assemble(lengths, order, limits);
}

BucketSet bucket_naive(std::span<const Tokens> lengths, int max_buckets) {
  check_input(lengths, max_buckets);
  const Tokens longest = *std::max_element(lengths.begin(), lengths.end());
  std::vector<Tokens> grid(max_buckets);
  for (int i = 0; i < max_buckets; ++i) {
    const Int128 num = static_cast<Int128>(i + 1) * longest;
    grid[i] = static_cast<Tokens>((num + max_buckets - 1) / max_buckets);
  }
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return assemble(lengths, sorted_order(lengths), grid);
}

BucketSet bucket_bruteforce(std::span<const Tokens> lengths, int max_buckets) {
  check_input(lengths, max_buckets);
  if (lengths.size() > kBucketBruteforceMaxLengths) {
    throw InvalidInput("bucket_bruteforce: at most 14 lengths");
  }
  const auto order = sorted_order(lengths);
  const int k = static_cast<int>(order.size());
  std::vector<Tokens> sorted(k);
  for (int i = 0; i < k; ++i) sorted[i] = lengths[order[i]];

  Tokens best_error = kInf;
  std::vector<Tokens> best_limits;
  const unsigned gaps = static_cast<unsigned>(k - 1);
  for (unsigned mask = 0; mask < (1u << gaps); ++mask) {
    if (std::popcount(mask) > max_buckets - 1) continue;
    bool valid = true;
    std::vector<Tokens> limits;
    Tokens error = 0;
    int run_start = 0;
    for (int i = 0; i < k && valid; ++i) {
      const bool cut_after = i == k - 1 || (mask >> i) & 1u;
      if (!cut_after) continue;
      if (i < k - 1 && sorted[i] == sorted[i + 1]) {
        valid = false;
        break;
      }
      for (int j = run_start; j <= i; ++j) error += sorted[i] - sorted[j];
      limits.push_back(sorted[i]);
      run_start = i + 1;
    }
    if (!valid) continue;
    const bool better =
        error < best_error ||
        (error == best_error &&
         (limits.size() < best_limits.size() ||
          (limits.size() == best_limits.size() && limits < best_limits)));
    if (better) {
      best_error = error;
      best_limits = std::move(limits);
    }
  }
  return assemble(lengths, order, best_limits);
}

double relative_token_error(const BucketSet& buckets, std::span<const Tokens> lengths) {
  const Tokens total = std::accumulate(lengths.begin(), lengths.end(), Tokens{0});
  return total > 0 ? static_cast<double>(buckets.total_error) / static_cast<double>(total)
                   : 0.0;
}

}  // namespace hetsp
