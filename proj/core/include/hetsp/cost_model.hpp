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

#ifndef HETSP_COST_MODEL_HPP_
#define HETSP_COST_MODEL_HPP_

#include <span>
#include <string>
#include <vector>

#include "hetsp/domain.hpp"

namespace hetsp {

// Sequences placed on one SP group of degree d over links of bandwidth v.
struct GroupLoad {
  std::vector<Tokens> token_lengths;
  int degree = 1;
  double bandwidth = 1.0;
};

// Per-device bytes: (sum / d) * M_token + M_ms, rounded half-up to a byte.
// An empty load costs M_ms.
Bytes memory_bytes(const GroupLoad& load, const CostCoefficients& coeffs);

// True iff the load fits E on every device, compared exactly on integers.
bool fits_memory(Tokens total_tokens, int degree, const CostCoefficients& coeffs,
                 const ClusterSpec& cluster);

// (1/d) * sum(alpha1 s^2 + alpha2 s) + beta1
double comp_time(const GroupLoad& load, const CostCoefficients& coeffs);

// (1/(d v)) * sum(alpha3 s) + beta2. Throws InvalidInput when v <= 0.
double comm_time(const GroupLoad& load, const CostCoefficients& coeffs);

// comp + comm + zero_overhead
double group_time(const GroupLoad& load, const CostCoefficients& coeffs);

// Time one group spends on `count` extra sequences of length `s`, without the
// per-group startup terms. This is the per-unit coefficient the planner uses.
double marginal_time(Tokens s, int degree, double bandwidth,
                     const CostCoefficients& coeffs);

// beta1 + beta2 + zero_overhead
double startup_time(const CostCoefficients& coeffs);

// ---------------------------------------------------------------------------
// Fitting from profiles.

struct ProfileRecord {
  std::vector<Tokens> token_lengths;
  int degree = 1;
  double bandwidth = 1.0;
  double measured_comp_time = 0.0;
  double measured_comm_time = 0.0;
  double measured_peak_memory = 0.0;  // bytes
};

struct FitOptions {
  // When false, rank-deficient designs are solved in the minimum-norm sense
  // and the unidentifiable terms are listed in FitResult::warnings instead of
  // raising an error.
  bool require_identifiable = true;
  bool fit_memory = true;
};

struct FitResult {
  CostCoefficients coeffs;
  std::vector<std::string> clamped;   // coefficients clamped from < 0 to 0
  std::vector<std::string> warnings;
  double max_rel_error = 0.0;         // over comp + comm totals
  double max_rel_error_comp = 0.0;
  double max_rel_error_comm = 0.0;
};

// Ordinary least squares on the linear models behind comp_time and
// comm_time, plus a simple regression of memory on tokens/d. Negative
// solutions are clamped to zero and reported. `base` supplies the
// coefficients that are not fitted (zero_overhead, and memory terms when
// fit_memory is false).
FitResult fit_coefficients(std::span<const ProfileRecord> records,
                           const FitOptions& options = {},
                           const CostCoefficients& base = {});

// Max relative error of total (comp + comm) predictions against records.
double max_relative_error(std::span<const ProfileRecord> records,
                          const CostCoefficients& coeffs);

}  // namespace hetsp

#endif  // HETSP_COST_MODEL_HPP_
