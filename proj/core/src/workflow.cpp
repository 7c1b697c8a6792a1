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

#include "hetsp/workflow.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <limits>
#include <memory>

#include "hetsp/blaster.hpp"

namespace hetsp {

WorkerPool::WorkerPool(int workers) {
  for (int i = 1; i < std::max(1, workers); ++i) threads_.emplace_back([this] { run(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::run() {
  for (;;) {
    std::function<void()> job;
    {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, [this] { return stop_ || !queue_.empty(); });
      if (queue_.empty()) return;
      job = std::move(queue_.front());
      queue_.pop_front();
    }
    job();
  }
}

namespace {

struct LoopState {
  std::size_t n = 0;
  const std::function<void(std::size_t)>* fn = nullptr;
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex mutex;
  std::condition_variable cv;
  std::vector<std::exception_ptr> errors;

  void drain() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      std::exception_ptr error;
      try {
        (*fn)(i);
      } catch (...) {
        error = std::current_exception();
      }
      std::lock_guard lock(mutex);
      if (error) errors[i] = error;
      if (++done == n) cv.notify_all();
    }
  }
};

}  // namespace

void WorkerPool::parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  auto state = std::make_shared<LoopState>();
  state->n = n;
  state->fn = &fn;
  state->errors.resize(n);
  const std::size_t helpers = std::min(threads_.size(), n - 1);
  if (helpers > 0) {
    {
      std::lock_guard lock(mutex_);
      for (std::size_t h = 0; h < helpers; ++h) queue_.emplace_back([state] { state->drain(); });
    }
    cv_.notify_all();
  }
  state->drain();
  {
    std::unique_lock lock(state->mutex);
    state->cv.wait(lock, [&] { return state->done == n; });
  }
  for (const auto& e : state->errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

struct TrialResult {
  int count = 0;
  bool feasible = false;
  Plan plan;
  long nodes = 0;
  std::vector<MilpInstance> instances;
  std::vector<MilpSolution> solutions;
};

TrialResult run_trial(const SequenceBatch& batch, const ClusterSpec& cluster,
                      const CostCoefficients& coeffs, const VirtualGroupCatalog& catalog,
                      const WorkflowConfig& config, int count, WorkerPool& pool) {
  TrialResult out;
  out.count = count;
  const MicroBatchSplit split = blast(batch, count);
  const std::size_t parts = split.micro_batches.size();
  std::vector<MicroBatchPlan> plans(parts);
  std::vector<MilpInstance> instances(parts);
  std::vector<MilpSolution> solutions(parts);
  pool.parallel_for(parts, [&](std::size_t i) {
    const auto& members = split.micro_batches[i];
    std::vector<Tokens> local;
    for (int idx : members) local.push_back(batch.lengths[idx]);
    BucketSet buckets = bucket_dp(local, config.bucket_count);
    for (auto& bucket : buckets.member_indices) {
      for (int& idx : bucket) idx = members[idx];
    }
    instances[i] = build_instance(buckets, catalog, coeffs, cluster, config.planner);
    solutions[i] = solve(instances[i]);
    if (solutions[i].has_solution()) {
      plans[i] = extract_plan(solutions[i], instances[i], batch.lengths);
    }
  });
  out.feasible = true;
  for (std::size_t i = 0; i < parts; ++i) {
    out.nodes += solutions[i].node_count;
    if (!solutions[i].has_solution()) out.feasible = false;
  }
  if (out.feasible) {
    out.plan.batch_id = batch.batch_id;
    for (auto& p : plans) {
      out.plan.predicted_total_time += p.predicted_makespan;
      out.plan.micro_batches.push_back(std::move(p));
    }
  }
  if (config.keep_milp) {
    out.instances = std::move(instances);
    out.solutions = std::move(solutions);
  }
  return out;
}

Plan solve_batch_on(const SequenceBatch& batch, const ClusterSpec& cluster,
                    const CostCoefficients& coeffs, const WorkflowConfig& config,
                    WorkerPool& pool, SolveDiagnostics* diagnostics) {
  const auto start = std::chrono::steady_clock::now();
  batch.validate();
  cluster.validate();
  coeffs.validate(cluster);
  if (config.trials < 1) throw InvalidInput("workflow: trials must be >= 1");
  if (config.bucket_count < 1) throw InvalidInput("workflow: bucket count must be >= 1");
  const VirtualGroupCatalog catalog = build_virtual_catalog(cluster);
  const int k_total = static_cast<int>(batch.lengths.size());
  const int m_min = min_microbatch_count(batch, cluster, coeffs, config.capacity_override);

  TrialResult best;
  bool have = false;
  int evaluated = 0;
  long nodes = 0;
  for (int window = 0; window < 2 && !have; ++window) {
    std::vector<int> counts;
    for (int m = m_min + window * config.trials; m < m_min + (window + 1) * config.trials; ++m) {
      if (m <= k_total) counts.push_back(m);
    }
    std::vector<TrialResult> results(counts.size());
    pool.parallel_for(counts.size(), [&](std::size_t i) {
      results[i] = run_trial(batch, cluster, coeffs, catalog, config, counts[i], pool);
    });
    for (auto& r : results) {
      ++evaluated;
      nodes += r.nodes;
      if (!r.feasible) continue;
      if (!have || r.plan.predicted_total_time < best.plan.predicted_total_time) {
        best = std::move(r);
        have = true;
      }
    }
  }
  if (!have) {
    const Tokens longest = *std::max_element(batch.lengths.begin(), batch.lengths.end());
    const Tokens largest = static_cast<Tokens>(cluster.total_devices) *
                           coeffs.device_token_capacity(cluster);
    throw Infeasible("no feasible plan for batch '" + batch.batch_id + "': longest sequence " +
                     std::to_string(longest) + " tokens; largest degree " +
                     std::to_string(cluster.total_devices) + " holds " +
                     std::to_string(largest) + " tokens");
  }
  if (diagnostics) {
    diagnostics->batch_id = batch.batch_id;
    diagnostics->micro_batch_count = best.count;
    diagnostics->trials_evaluated = evaluated;
    diagnostics->node_count = nodes;
    diagnostics->wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    diagnostics->instances = std::move(best.instances);
    diagnostics->solutions = std::move(best.solutions);
  }
  return std::move(best.plan);
}

}  // namespace

Plan solve_batch(const SequenceBatch& batch, const ClusterSpec& cluster,
                 const CostCoefficients& coeffs, const WorkflowConfig& config,
                 SolveDiagnostics* diagnostics) {
  WorkerPool pool(config.jobs);
  return solve_batch_on(batch, cluster, coeffs, config, pool, diagnostics);
}

std::vector<Plan> solve_stream(std::span<const SequenceBatch> batches, const ClusterSpec& cluster,
                               const CostCoefficients& coeffs, const WorkflowConfig& config,
                               std::vector<SolveDiagnostics>* diagnostics) {
  WorkerPool pool(config.jobs);
  std::vector<Plan> plans(batches.size());
  std::vector<SolveDiagnostics> diags(batches.size());
  pool.parallel_for(batches.size(), [&](std::size_t i) {
    plans[i] = solve_batch_on(batches[i], cluster, coeffs, config, pool, &diags[i]);
  });
  if (diagnostics) *diagnostics = std::move(diags);
  return plans;
}

}  // namespace hetsp
