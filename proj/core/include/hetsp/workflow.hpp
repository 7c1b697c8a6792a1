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

#ifndef HETSP_WORKFLOW_HPP_
#define HETSP_WORKFLOW_HPP_

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "hetsp/bucketing.hpp"
#include "hetsp/planner.hpp"

namespace hetsp {

// Fixed-size pool. parallel_for lets the calling thread work on its own
// items, so nested calls from inside a task cannot deadlock. workers = 1
// runs everything on the caller.
class WorkerPool {
 public:
  explicit WorkerPool(int workers);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  int size() const { return static_cast<int>(threads_.size()) + 1; }

  // Calls fn(i) for i in [0, n). Rethrows the exception of the lowest
  // failing index after all items finish.
  void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

 private:
  void run();

  std::vector<std::thread> threads_;
  std::deque<std::function<void()>> queue_;
  std::mutex mutex_;
  std::condition_variable cv_;
  bool stop_ = false;
};

struct WorkflowConfig {
  int bucket_count = kDefaultBucketCount;  // Q
  int trials = 5;                          // M'
  PlannerOptions planner;
  int jobs = 1;
  std::optional<Tokens> capacity_override;  // replaces N * floor((E - M_ms) / M_token)
  bool keep_milp = false;                   // fill SolveDiagnostics::instances
};

struct SolveDiagnostics {
  std::string batch_id;
  int micro_batch_count = 0;
  int trials_evaluated = 0;
  long node_count = 0;
  double wall_time = 0.0;
  std::vector<MilpInstance> instances;  // chosen trial, when keep_milp
  std::vector<MilpSolution> solutions;
};

// Plans one global batch: for M in [M_min, M_min + M'), blast into M
// micro-batches, bucket and solve each, and keep the smallest total (ties:
// smaller M). If no trial is feasible the window is extended once by M'.
// Throws Infeasible afterwards.
Plan solve_batch(const SequenceBatch& batch, const ClusterSpec& cluster,
                 const CostCoefficients& coeffs, const WorkflowConfig& config = {},
                 SolveDiagnostics* diagnostics = nullptr);

// Plans many batches concurrently; results are in input order.
std::vector<Plan> solve_stream(std::span<const SequenceBatch> batches, const ClusterSpec& cluster,
                               const CostCoefficients& coeffs, const WorkflowConfig& config = {},
                               std::vector<SolveDiagnostics>* diagnostics = nullptr);

}  // namespace hetsp

#endif  // HETSP_WORKFLOW_HPP_
