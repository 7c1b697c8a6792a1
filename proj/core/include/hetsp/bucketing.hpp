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

#ifndef HETSP_BUCKETING_HPP_
#define HETSP_BUCKETING_HPP_

#include <span>

#include "hetsp/domain.hpp"

namespace hetsp {

inline constexpr int kDefaultBucketCount = 16;

// Groups lengths into at most `max_buckets` contiguous runs of the sorted
// lengths, minimizing the summed gap to each run's maximum. Equal lengths
// always share a bucket. Among optimal groupings the one with fewest buckets,
// then the lexicographically smallest limit vector, is returned.
// member_indices refer to positions in `lengths`.
BucketSet bucket_dp(std::span<const Tokens> lengths, int max_buckets);

// Equal-width grid over (0, max]: limit i is ceil((i+1) * max / Q). Empty
// intervals are dropped. Limits are grid points, so they may exceed the
// largest member.
BucketSet bucket_naive(std::span<const Tokens> lengths, int max_buckets);

// Exhaustive oracle for bucket_dp; accepts at most 14 lengths.
BucketSet bucket_bruteforce(std::span<const Tokens> lengths, int max_buckets);

inline constexpr std::size_t kBucketBruteforceMaxLengths = 14;

// Relative token error: total_error / sum(lengths).
double relative_token_error(const BucketSet& buckets, std::span<const Tokens> lengths);

}  // namespace hetsp

#endif  // HETSP_BUCKETING_HPP_
