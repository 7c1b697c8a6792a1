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

#ifndef HETSP_IO_HPP_
#define HETSP_IO_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hetsp/cost_model.hpp"
#include "hetsp/planner.hpp"
#include "hetsp/simulator.hpp"
#include "hetsp/workflow.hpp"

namespace hetsp::io {

inline constexpr int kPlanSchema = 1;

// JSON text for each artifact. Parsers throw InvalidInput on malformed text,
// missing fields, or (for cluster and coefficients) unknown fields. Emitted
// text always ends in a newline.
std::string to_json(const ClusterSpec& cluster);
std::string to_json(const CostCoefficients& coeffs);
std::string to_json(const BucketSet& buckets);
std::string to_json(const Plan& plan);
// Instance with its presolved constraint rows, and the matching solution.
std::string to_json(const MilpInstance& instance, const MilpSolution& solution);

ClusterSpec cluster_from_json(std::string_view text);
CostCoefficients coeffs_from_json(std::string_view text);
BucketSet buckets_from_json(std::string_view text);
Plan plan_from_json(std::string_view text);

// Lengths: one integer per line, or JSONL objects {"length": n}. Blank lines
// are skipped.
std::vector<Tokens> parse_lengths(std::string_view text);
// Batches: JSONL objects {"batch_id": "...", "lengths": [...]}, or a plain
// lengths file, which becomes a single batch named `fallback_id`.
std::vector<SequenceBatch> parse_batches(std::string_view text,
                                         const std::string& fallback_id = "b0");
std::string batches_to_jsonl(std::span<const SequenceBatch> batches);

// Profile CSV with header tokens;degree;bandwidth;comp_s;comm_s;mem_bytes,
// where tokens is a comma-separated list of sequence lengths (spaces also accepted).
std::vector<ProfileRecord> parse_profile_csv(std::string_view text);
std::string profile_to_csv(std::span<const ProfileRecord> records);

std::string report_csv(const SimReport& report);
std::string degree_lengths_csv(const SimReport& report);
std::string metrics_csv(std::span<const SolveDiagnostics> diagnostics);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace hetsp::io

#endif  // HETSP_IO_HPP_
