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

// Test-side reference implementations. They share no code with the library
// beyond the plain data types, and favor obviousness over speed.

#ifndef HETSP_TESTS_ORACLES_HPP_
#define HETSP_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "hetsp/cost_model.hpp"
#include "hetsp/domain.hpp"

namespace hetsp::oracle {

inline double group_time(const std::vector<Tokens>& load, int d, double v,
                         const CostCoefficients& k) {
  long double comp = 0, comm = 0;
  for (Tokens s : load) {
    const long double x = static_cast<long double>(s);
    comp += k.alpha1 * x * x + k.alpha2 * x;
    comm += k.alpha3 * x;
  }
  return static_cast<double>(comp / d + k.beta1 + comm / (static_cast<long double>(d) * v) +
                             k.beta2 + k.zero_overhead);
}

inline bool fits(const std::vector<Tokens>& load, int d, const CostCoefficients& k,
                 const ClusterSpec& c) {
  long double tokens = 0;
  for (Tokens s : load) tokens += s;
  // Values in tests are small enough for long double to be exact.
  return tokens * k.m_token <= static_cast<long double>(c.memory_budget - k.m_ms) * d;
}

struct Slot {
  int degree;
  double bandwidth;
};

inline std::vector<Slot> slots(const ClusterSpec& c) {
  std::vector<Slot> out;
  for (int d = 1; d <= c.total_devices; d *= 2) {
    const double v = d <= c.devices_per_node ? c.intra_node_bandwidth : c.inter_node_bandwidth;
    for (int i = 0; i < c.total_devices / d; ++i) out.push_back({d, v});
  }
  return out;
}

// Minimum makespan over every subset of slots within the device budget and
// every assignment of the listed sequences to the chosen slots. Returns
// +inf when nothing fits.
inline double min_makespan(const std::vector<Tokens>& units, const ClusterSpec& c,
                           const CostCoefficients& k, bool strict = false) {
  const auto all = slots(c);
  const int P = static_cast<int>(all.size());
  double best = std::numeric_limits<double>::infinity();
  for (int mask = 1; mask < (1 << P); ++mask) {
    std::vector<Slot> chosen;
    int devices = 0;
    for (int p = 0; p < P; ++p) {
      if (mask >> p & 1) {
        chosen.push_back(all[p]);
        devices += all[p].degree;
      }
    }
    if (devices > c.total_devices || (strict && devices != c.total_devices)) continue;
    const int G = static_cast<int>(chosen.size());
    std::vector<int> where(units.size(), 0);
    while (true) {
      std::vector<std::vector<Tokens>> loads(G);
      for (std::size_t u = 0; u < units.size(); ++u) loads[where[u]].push_back(units[u]);
      double makespan = 0;
      bool ok = true;
      for (int g = 0; g < G && ok; ++g) {
        if (!fits(loads[g], chosen[g].degree, k, c)) ok = false;
        makespan = std::max(makespan, group_time(loads[g], chosen[g].degree,
                                                 chosen[g].bandwidth, k));
      }
      if (ok) best = std::min(best, makespan);
      std::size_t u = 0;
      while (u < where.size() && ++where[u] == G) where[u++] = 0;
      if (u == where.size()) break;
    }
  }
  return best;
}

// Calls fn(cuts) for every strictly increasing cut vector of `parts` - 1
// positions in (0, n).
template <typename Fn>
void for_each_cut(int n, int parts, Fn&& fn) {
  std::vector<int> cuts(parts - 1);
  std::iota(cuts.begin(), cuts.end(), 1);
  if (parts - 1 > n - 1) return;
  while (true) {
    fn(cuts);
    int i = parts - 2;
    while (i >= 0 && cuts[i] == n - (parts - 1 - i)) --i;
    if (i < 0) return;
    ++cuts[i];
    for (int j = i + 1; j < parts - 1; ++j) cuts[j] = cuts[j - 1] + 1;
  }
}

// Least summed gap to each run's maximum over contiguous runs of the sorted
// lengths, using at most q runs.
inline Tokens min_bucket_error(std::vector<Tokens> lengths, int q) {
  std::sort(lengths.begin(), lengths.end());
  const int n = static_cast<int>(lengths.size());
  Tokens best = std::numeric_limits<Tokens>::max();
  for (int parts = 1; parts <= std::min(q, n); ++parts) {
    for_each_cut(n, parts, [&](const std::vector<int>& cuts) {
      Tokens err = 0;
      int begin = 0;
      for (int i = 0; i <= static_cast<int>(cuts.size()); ++i) {
        const int end = i < static_cast<int>(cuts.size()) ? cuts[i] : n;
        for (int j = begin; j < end; ++j) err += lengths[end - 1] - lengths[j];
        begin = end;
      }
      best = std::min(best, err);
    });
  }
  return best;
}

// Smallest possible largest part sum over contiguous splits of the sorted
// lengths into exactly m parts.
inline Tokens min_max_part(std::vector<Tokens> lengths, int m) {
  std::sort(lengths.begin(), lengths.end());
  const int n = static_cast<int>(lengths.size());
  Tokens best = std::numeric_limits<Tokens>::max();
  for_each_cut(n, m, [&](const std::vector<int>& cuts) {
    Tokens worst = 0;
    int begin = 0;
    for (int i = 0; i <= static_cast<int>(cuts.size()); ++i) {
      const int end = i < static_cast<int>(cuts.size()) ? cuts[i] : n;
      Tokens sum = 0;
      for (int j = begin; j < end; ++j) sum += lengths[j];
      worst = std::max(worst, sum);
      begin = end;
    }
    best = std::min(best, worst);
  });
  return best;
}

// The calibrated 64-device setting used by the two-length example: 6000
// tokens per device beside 16 GiB of model states.
inline ClusterSpec two_length_cluster() {
  ClusterSpec c;
  c.total_devices = 64;
  c.devices_per_node = 8;
  c.intra_node_bandwidth = 6e11;
  c.inter_node_bandwidth = 1e11;
  c.memory_budget = (16LL << 30) + 6000LL * 4194304;
  return c;
}

inline CostCoefficients two_length_coeffs() {
  CostCoefficients k;
  k.alpha1 = 5.376e-9;
  k.alpha2 = 5.376e-9 * 38800;
  k.alpha3 = 2e7;
  k.m_token = 4194304;
  k.m_ms = 16LL << 30;
  return k;
}

inline SequenceBatch two_length_batch() { return {"two_length", {100000, 48000, 48000, 48000, 48000}}; }

// Profile records produced by the cost formulas above, with independent
// uniform multiplicative noise of +-`noise` on every measurement.
inline std::vector<ProfileRecord> synthetic_profile(const CostCoefficients& k, int records,
                                                    double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_len(std::log(512.0), std::log(65536.0));
  std::uniform_real_distribution<double> jitter(-noise, noise);
  std::vector<ProfileRecord> out;
  for (int i = 0; i < records; ++i) {
    ProfileRecord r;
    const int count = 1 + static_cast<int>(rng() % 8);
    for (int j = 0; j < count; ++j) {
      r.token_lengths.push_back(static_cast<Tokens>(std::exp(log_len(rng))));
    }
    r.degree = 1 << (rng() % 6);
    r.bandwidth = r.degree <= 8 ? 1.5e11 : 2.5e10;
    long double sq = 0, lin = 0;
    for (Tokens s : r.token_lengths) {
      sq += static_cast<long double>(s) * s;
      lin += s;
    }
    const double comp = static_cast<double>((k.alpha1 * sq + k.alpha2 * lin) / r.degree + k.beta1);
    const double comm = static_cast<double>(k.alpha3 * lin / (r.degree * r.bandwidth) + k.beta2);
    const double mem = static_cast<double>(lin / r.degree * k.m_token + k.m_ms);
    r.measured_comp_time = comp * (1 + jitter(rng));
    r.measured_comm_time = comm * (1 + jitter(rng));
    r.measured_peak_memory = mem * (1 + jitter(rng));
    out.push_back(std::move(r));
  }
  return out;
}

inline CostCoefficients profile_truth() {
  CostCoefficients k;
  k.alpha1 = 2.5e-9;
  k.alpha2 = 1e-4;
  k.beta1 = 0.05;
  k.alpha3 = 2e7;
  k.beta2 = 0.01;
  k.m_token = 262144;
  k.m_ms = 8LL << 30;
  return k;
}

}  // namespace hetsp::oracle

#endif  // HETSP_TESTS_ORACLES_HPP_
