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

#include "hetsp/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <queue>
#include <set>

#include "hetsp/baselines.hpp"
#include "hetsp/cost_model.hpp"
#include "hetsp/lp.hpp"

namespace hetsp {

namespace {

constexpr double kIntTol = 1e-6;
constexpr double kRelGap = 1e-10;
constexpr std::size_t kCacheBytes = std::size_t{256} << 20;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Variable layout after presolve: slots that can never help are dropped and
// (bucket, slot) pairs whose single sequence overflows memory are fixed to 0.
struct Presolved {
  int Q = 0;
  int P = 0;
  std::vector<int> kept;                   // catalog indices, catalog order
  std::vector<std::vector<char>> fits;     // [q][p]
  std::vector<int> m_var;                  // [p] -> var or -1
  std::vector<std::vector<int>> a_var;     // [q][p] -> var or -1
  std::vector<std::vector<double>> t;      // [q][p] marginal time
  int c_var = -1;
  int var_count = 0;
  double c_lower = 0.0;
  std::string infeasible;                  // "memory" if some bucket fits nowhere
};

Presolved presolve(const MilpInstance& inst) {
  Presolved ps;
  ps.Q = inst.bucket_count();
  ps.P = inst.slot_count();
  const auto& slots = inst.catalog.slots;
  const auto& limits = inst.buckets.upper_limits;
  const int total_count = inst.buckets.total_count();
  const bool strict = inst.options.strict_device_equality;
  const double beta = startup_time(inst.coeffs);

  ps.fits.assign(ps.Q, std::vector<char>(ps.P, 0));
  ps.t.assign(ps.Q, std::vector<double>(ps.P, 0.0));
  for (int q = 0; q < ps.Q; ++q) {
    bool any = false;
    for (int p = 0; p < ps.P; ++p) {
      ps.t[q][p] = marginal_time(limits[q], slots[p].degree, slots[p].bandwidth, inst.coeffs);
      if (inst.slot_allowed(p) && fits_memory(limits[q], slots[p].degree, inst.coeffs, inst.cluster)) {
        ps.fits[q][p] = 1;
        any = true;
      }
    }
    if (!any) ps.infeasible = "memory";
  }
  if (!ps.infeasible.empty()) return ps;

  // Per degree class keep at most (number of sequences) slots: an empty
  // selected group never lowers the makespan. Equality needs them all.
  std::map<int, int> kept_in_class;
  for (int p = 0; p < ps.P; ++p) {
    if (!inst.slot_allowed(p)) continue;
    bool useful = strict;
    for (int q = 0; q < ps.Q && !useful; ++q) useful = ps.fits[q][p] != 0;
    if (!useful) continue;
    int& n = kept_in_class[slots[p].degree];
    if (!strict && n >= total_count) continue;
    ++n;
    ps.kept.push_back(p);
  }

  ps.m_var.assign(ps.P, -1);
  ps.a_var.assign(ps.Q, std::vector<int>(ps.P, -1));
  int next = 0;
  for (int p : ps.kept) ps.m_var[p] = next++;
  for (int q = 0; q < ps.Q; ++q) {
    for (int p : ps.kept) {
      if (ps.fits[q][p]) ps.a_var[q][p] = next++;
    }
  }
  ps.c_var = next++;
  ps.var_count = next;

  for (int q = 0; q < ps.Q; ++q) {
    double best = std::numeric_limits<double>::infinity();
    for (int p : ps.kept) {
      if (ps.fits[q][p]) best = std::min(best, ps.t[q][p] + beta);
    }
    ps.c_lower = std::max(ps.c_lower, best);
  }
  return ps;
}

std::string slot_name(const GroupSlot& s) { return "p" + std::to_string(s.slot_id); }

lp::Model make_model(const MilpInstance& inst, const Presolved& ps) {
  using lp::Row;
  using lp::Sense;
  lp::Model model;
  const auto& slots = inst.catalog.slots;
  const auto& limits = inst.buckets.upper_limits;
  const auto& counts = inst.buckets.counts;
  const double beta = startup_time(inst.coeffs);
  const double n_dev = inst.cluster.total_devices;
  const double cap = static_cast<double>(inst.cluster.memory_budget - inst.coeffs.m_ms) /
                     static_cast<double>(inst.coeffs.m_token);

  for (int p : ps.kept) {
    model.add_var({"m[" + slot_name(slots[p]) + "]", 0.0, 1.0, 0.0, true});
  }
  for (int q = 0; q < ps.Q; ++q) {
    for (int p : ps.kept) {
      if (ps.a_var[q][p] < 0) continue;
      model.add_var({"A[q" + std::to_string(q) + "," + slot_name(slots[p]) + "]", 0.0,
                     static_cast<double>(counts[q]), 0.0, true});
    }
  }
  model.add_var({"C", ps.c_lower, lp::kInfinity, 1.0, false});

  for (int p : ps.kept) {
    Row row{"time[" + slot_name(slots[p]) + "]", {}, Sense::kLessEqual, 0.0};
    for (int q = 0; q < ps.Q; ++q) {
      if (ps.a_var[q][p] >= 0) row.terms.push_back({ps.a_var[q][p], ps.t[q][p]});
    }
    if (beta != 0.0) row.terms.push_back({ps.m_var[p], beta});
    row.terms.push_back({ps.c_var, -1.0});
    model.add_row(std::move(row));
  }
  for (int p : ps.kept) {
    const double d = slots[p].degree;
    double most = 0.0;
    Row row{"memory[" + slot_name(slots[p]) + "]", {}, Sense::kLessEqual, 0.0};
    for (int q = 0; q < ps.Q; ++q) {
      if (ps.a_var[q][p] < 0) continue;
      const double coef = static_cast<double>(limits[q]) / (d * cap);
      row.terms.push_back({ps.a_var[q][p], coef});
      most += coef * counts[q];
    }
    if (most <= 1.0) continue;  // implied by the linking rows
    row.terms.push_back({ps.m_var[p], -1.0});
    model.add_row(std::move(row));
  }
  if (!inst.options.pairwise_links) {
    // One aggregated row per slot; integral solutions are the same.
    for (int p : ps.kept) {
      Row row{"link[" + slot_name(slots[p]) + "]", {}, Sense::kLessEqual, 0.0};
      double total = 0.0;
      for (int q = 0; q < ps.Q; ++q) {
        if (ps.a_var[q][p] < 0) continue;
        row.terms.push_back({ps.a_var[q][p], 1.0});
        total += counts[q];
      }
      row.terms.push_back({ps.m_var[p], -total});
      model.add_row(std::move(row));
    }
  } else {
    for (int q = 0; q < ps.Q; ++q) {
      for (int p : ps.kept) {
        if (ps.a_var[q][p] < 0) continue;
        model.add_row({"link[q" + std::to_string(q) + "," + slot_name(slots[p]) + "]",
                       {{ps.a_var[q][p], 1.0}, {ps.m_var[p], -static_cast<double>(counts[q])}},
                       Sense::kLessEqual,
                       0.0});
      }
    }
  }
  {
    Row row{"devices", {}, inst.options.strict_device_equality ? Sense::kEqual : Sense::kLessEqual,
            1.0};
    for (int p : ps.kept) row.terms.push_back({ps.m_var[p], slots[p].degree / n_dev});
    model.add_row(std::move(row));
  }
  for (int q = 0; q < ps.Q; ++q) {
    Row row{"cover[q" + std::to_string(q) + "]", {}, Sense::kEqual,
            static_cast<double>(counts[q])};
    for (int p : ps.kept) {
      if (ps.a_var[q][p] >= 0) row.terms.push_back({ps.a_var[q][p], 1.0});
    }
    model.add_row(std::move(row));
  }
  if (inst.options.symmetry_breaking) {
    const double s_max = static_cast<double>(limits.back());
    for (std::size_t i = 0; i + 1 < ps.kept.size(); ++i) {
      const int p = ps.kept[i];
      const int r = ps.kept[i + 1];
      if (slots[p].degree != slots[r].degree) continue;
      model.add_row({"sym_m[" + slot_name(slots[p]) + "]",
                     {{ps.m_var[p], 1.0}, {ps.m_var[r], -1.0}},
                     Sense::kGreaterEqual,
                     0.0});
      Row row{"sym_tokens[" + slot_name(slots[p]) + "]", {}, Sense::kGreaterEqual, 0.0};
      for (int q = 0; q < ps.Q; ++q) {
        if (ps.a_var[q][p] < 0) continue;
        const double w = static_cast<double>(limits[q]) / s_max;
        row.terms.push_back({ps.a_var[q][p], w});
        row.terms.push_back({ps.a_var[q][r], -w});
      }
      model.add_row(std::move(row));
    }
  }
  {
    // Device-weighted average of the group times cannot exceed C.
    Row row{"energy", {}, Sense::kLessEqual, 0.0};
    for (int p : ps.kept) {
      const double w = slots[p].degree / n_dev;
      if (beta != 0.0) row.terms.push_back({ps.m_var[p], w * beta});
      for (int q = 0; q < ps.Q; ++q) {
        if (ps.a_var[q][p] >= 0) row.terms.push_back({ps.a_var[q][p], w * ps.t[q][p]});
      }
    }
    row.terms.push_back({ps.c_var, -1.0});
    model.add_row(std::move(row));
  }
  return model;
}

std::vector<Tokens> expand_load(const MilpInstance& inst, const std::vector<std::vector<int>>& A,
                                int p) {
  std::vector<Tokens> load;
  for (int q = 0; q < inst.bucket_count(); ++q) {
    load.insert(load.end(), A[q][p], inst.buckets.upper_limits[q]);
  }
  return load;
}

// Unselects empty groups; they never set the makespan.
void drop_empty(const MilpInstance& inst, std::vector<int>& m,
                const std::vector<std::vector<int>>& A) {
  if (inst.options.strict_device_equality) return;
  for (int p = 0; p < inst.slot_count(); ++p) {
    bool empty = true;
    for (int q = 0; q < inst.bucket_count() && empty; ++q) empty = A[q][p] == 0;
    if (empty) m[p] = 0;
  }
}

struct Incumbent {
  double value = std::numeric_limits<double>::infinity();
  std::vector<int> m;
  std::vector<std::vector<int>> A;

  bool found() const { return std::isfinite(value); }
};

void offer(const MilpInstance& inst, std::vector<int> m, const std::vector<std::vector<int>>& A,
           Incumbent& inc) {
  drop_empty(inst, m, A);
  const Evaluation ev = evaluate(inst, m, A);
  if (ev.feasible && ev.makespan < inc.value) {
    inc.value = ev.makespan;
    inc.m = std::move(m);
    inc.A = A;
  }
}

// Working copy of a candidate with cached per-slot tokens and times, for
// the greedy assignment and the local search below.
struct Candidate {
  const MilpInstance* inst = nullptr;
  const Presolved* ps = nullptr;
  std::vector<int> m;
  std::vector<std::vector<int>> A;
  std::vector<Tokens> tokens;
  std::vector<double> time;
  long devices = 0;

  Candidate(const MilpInstance& instance, const Presolved& pre)
      : inst(&instance), ps(&pre), m(pre.P, 0), A(pre.Q, std::vector<int>(pre.P, 0)),
        tokens(pre.P, 0), time(pre.P, 0.0) {}

  int degree(int p) const { return inst->catalog.slots[p].degree; }
  Tokens length(int q) const { return inst->buckets.upper_limits[q]; }
  bool fits(int q, int p, Tokens extra_tokens) const {
    return ps->fits[q][p] &&
           fits_memory(tokens[p] + extra_tokens, degree(p), inst->coeffs, inst->cluster);
  }
  void select(int p) {
    if (m[p]) return;
    m[p] = 1;
    devices += degree(p);
    time[p] = startup_time(inst->coeffs);
  }
  void add(int q, int p, int count) {
    A[q][p] += count;
    tokens[p] += count * length(q);
    time[p] += count * ps->t[q][p];
  }
};

// Longest unit first onto the selected slot where it finishes earliest.
bool greedy_assign(Candidate& c) {
  for (int q = c.ps->Q - 1; q >= 0; --q) {
    for (int u = 0; u < c.inst->buckets.counts[q]; ++u) {
      int best = -1;
      for (int p : c.ps->kept) {
        if (!c.m[p] || !c.fits(q, p, c.length(q))) continue;
        if (best < 0 || c.time[p] + c.ps->t[q][p] < c.time[best] + c.ps->t[q][best]) best = p;
      }
      if (best < 0) return false;
      c.add(q, best, 1);
    }
  }
  return true;
}

// First-improvement descent on the critical group: move one unit elsewhere
// (possibly opening an unused slot) or swap it with a shorter unit.
void polish(Candidate& c) {
  const auto& ps = *c.ps;
  const bool may_open = !c.inst->options.strict_device_equality;
  const int max_rounds = 4 * c.inst->buckets.total_count() + 16;
  for (int round = 0; round < max_rounds; ++round) {
    int crit = -1;
    for (int p : ps.kept) {
      if (c.m[p] && (crit < 0 || c.time[p] > c.time[crit])) crit = p;
    }
    if (crit < 0) return;
    const double target = c.time[crit] - 1e-12 * c.time[crit];
    double best_val = target;
    int best_q = -1, best_p = -1, best_r = -1;
    std::map<int, bool> opened_class;
    for (int p : ps.kept) {
      if (p == crit) continue;
      const bool open_new = !c.m[p];
      if (open_new) {
        if (!may_open || opened_class[c.degree(p)]) continue;
        opened_class[c.degree(p)] = true;
        if (c.devices + c.degree(p) > c.inst->cluster.total_devices) continue;
      }
      const double base = open_new ? startup_time(c.inst->coeffs) : c.time[p];
      for (int q = 0; q < ps.Q; ++q) {
        if (c.A[q][crit] == 0) continue;
        const double left = c.time[crit] - ps.t[q][crit];
        if (c.fits(q, p, c.length(q))) {
          const double val = std::max(left, base + ps.t[q][p]);
          if (val < best_val) {
            best_val = val;
            best_q = q;
            best_p = p;
            best_r = -1;
          }
        }
        if (open_new) continue;
        for (int r = 0; r < q; ++r) {
          if (c.A[r][p] == 0) continue;
          const Tokens delta = c.length(q) - c.length(r);
          if (!c.fits(q, p, delta) || !c.fits(r, crit, -delta)) continue;
          const double val = std::max(left + ps.t[r][crit], base - ps.t[r][p] + ps.t[q][p]);
          if (val < best_val) {
            best_val = val;
            best_q = q;
            best_p = p;
            best_r = r;
          }
        }
      }
    }
    if (best_q < 0) return;
    c.select(best_p);
    c.add(best_q, crit, -1);
    c.add(best_q, best_p, 1);
    if (best_r >= 0) {
      c.add(best_r, best_p, -1);
      c.add(best_r, crit, 1);
    }
  }
}

// Assigns onto a fixed selection, polishes, and offers the result.
void try_selection(const MilpInstance& inst, const Presolved& ps, const std::vector<int>& chosen,
                   Incumbent& inc) {
  Candidate c(inst, ps);
  for (int p : chosen) c.select(p);
  if (!greedy_assign(c)) return;
  polish(c);
  offer(inst, c.m, c.A, inc);
}

// Homogeneous starting points, one family per degree class: longest
// processing time first, and best-fit-decreasing packing into a single wave.
void seed_homogeneous(const MilpInstance& inst, const Presolved& ps, Incumbent& inc) {
  const auto& slots = inst.catalog.slots;
  const auto& limits = inst.buckets.upper_limits;
  const double beta = startup_time(inst.coeffs);
  std::map<int, std::vector<int>, std::greater<>> classes;
  for (int p : ps.kept) classes[slots[p].degree].push_back(p);

  std::vector<int> units;  // bucket per sequence, longest first
  for (int q = ps.Q - 1; q >= 0; --q) units.insert(units.end(), inst.buckets.counts[q], q);

  for (const auto& [degree, members] : classes) {
    const int G = static_cast<int>(members.size());
    // LPT.
    {
      std::vector<int> m(ps.P, 0);
      std::vector<std::vector<int>> A(ps.Q, std::vector<int>(ps.P, 0));
      std::vector<Tokens> tokens(G, 0);
      std::vector<double> time(G, 0.0);
      bool ok = true;
      for (int q : units) {
        int best = -1;
        double best_time = 0.0;
        for (int g = 0; g < G; ++g) {
          const int p = members[g];
          if (!ps.fits[q][p]) continue;
          if (!fits_memory(tokens[g] + limits[q], degree, inst.coeffs, inst.cluster)) continue;
          const double tt = (tokens[g] == 0 ? beta : time[g]) + ps.t[q][p];
          if (best < 0 || tt < best_time) {
            best = g;
            best_time = tt;
          }
        }
        if (best < 0) {
          ok = false;
          break;
        }
        tokens[best] += limits[q];
        time[best] = best_time;
        ++A[q][members[best]];
        m[members[best]] = 1;
      }
      if (ok) offer(inst, m, A, inc);
      try_selection(inst, ps, members, inc);
    }
    // BFD single wave.
    {
      const Tokens capacity = degree * inst.coeffs.device_token_capacity(inst.cluster);
      std::vector<Tokens> unit_lengths;
      for (int q : units) unit_lengths.push_back(limits[q]);
      if (unit_lengths.empty() ||
          *std::max_element(unit_lengths.begin(), unit_lengths.end()) > capacity) {
        continue;
      }
      const auto packs = bfd_pack_indices(unit_lengths, capacity);
      if (static_cast<int>(packs.size()) > G) continue;
      Candidate c(inst, ps);
      for (std::size_t k = 0; k < packs.size(); ++k) {
        const int p = members[k];
        c.select(p);
        for (int u : packs[k]) c.add(units[u], p, 1);
      }
      offer(inst, c.m, c.A, inc);
      polish(c);
      offer(inst, c.m, c.A, inc);
    }
  }
}

// Bound changes along the path from the root; shared between siblings.
struct BoundChange {
  int var;
  bool upper;
  double value;
  std::shared_ptr<const BoundChange> parent;
};

struct Node {
  long id = 0;
  long parent = -1;
  double bound = 0.0;
  std::shared_ptr<const BoundChange> changes;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

struct CacheEntry {
  std::shared_ptr<const lp::DualSimplex> tableau;
  int pending = 0;
};

std::string classify_infeasible(const Presolved& ps) {
  return ps.infeasible.empty() ? "coverage" : ps.infeasible;
}

}  // namespace

bool MilpInstance::slot_allowed(int p) const {
  const int d = catalog.slots[p].degree;
  if (options.max_degree > 0 && d > options.max_degree) return false;
  if (options.degree_divisor > 0 && options.degree_divisor % d != 0) return false;
  if (options.allowed_slots) {
    const auto& ids = *options.allowed_slots;
    if (std::find(ids.begin(), ids.end(), catalog.slots[p].slot_id) == ids.end()) return false;
  }
  return true;
}

MilpInstance build_instance(const BucketSet& buckets, const VirtualGroupCatalog& catalog,
                            const CostCoefficients& coeffs, const ClusterSpec& cluster,
                            const PlannerOptions& options) {
  if (buckets.size() == 0) throw InvalidInput("planner: bucket set is empty");
  if (catalog.size() == 0) throw InvalidInput("planner: group catalog is empty");
  if (buckets.counts.size() != buckets.size()) {
    throw InvalidInput("planner: bucket counts do not match limits");
  }
  for (int c : buckets.counts) {
    if (c < 1) throw InvalidInput("planner: bucket counts must be positive");
  }
  cluster.validate();
  coeffs.validate(cluster);
  return MilpInstance{catalog, buckets, coeffs, cluster, options};
}

Evaluation evaluate(const MilpInstance& inst, const std::vector<int>& m,
                    const std::vector<std::vector<int>>& A) {
  const int P = inst.slot_count();
  const int Q = inst.bucket_count();
  if (static_cast<int>(m.size()) != P || static_cast<int>(A.size()) != Q) {
    throw InvalidInput("evaluate: solution shape does not match the instance");
  }
  Evaluation ev;
  for (int p = 0; p < P; ++p) {
    if (m[p] != 0 && m[p] != 1) return ev.violated = "binary", ev;
  }
  for (int q = 0; q < Q; ++q) {
    if (static_cast<int>(A[q].size()) != P) {
      throw InvalidInput("evaluate: solution shape does not match the instance");
    }
    for (int p = 0; p < P; ++p) {
      if (A[q][p] < 0) return ev.violated = "binary", ev;
      if (A[q][p] > 0 && m[p] == 0) return ev.violated = "linking", ev;
    }
  }
  for (int p = 0; p < P; ++p) {
    if (m[p] && !inst.slot_allowed(p)) return ev.violated = "degree", ev;
  }
  for (int q = 0; q < Q; ++q) {
    long sum = 0;
    for (int p = 0; p < P; ++p) sum += A[q][p];
    if (sum != inst.buckets.counts[q]) return ev.violated = "coverage", ev;
  }
  long devices = 0;
  for (int p = 0; p < P; ++p) devices += static_cast<long>(m[p]) * inst.catalog.slots[p].degree;
  if (devices > inst.cluster.total_devices ||
      (inst.options.strict_device_equality && devices != inst.cluster.total_devices)) {
    return ev.violated = "devices", ev;
  }
  double makespan = 0.0;
  for (int p = 0; p < P; ++p) {
    if (!m[p]) continue;
    const GroupSlot& slot = inst.catalog.slots[p];
    GroupLoad load{expand_load(inst, A, p), slot.degree, slot.bandwidth};
    Tokens total = 0;
    for (Tokens s : load.token_lengths) total += s;
    if (!fits_memory(total, slot.degree, inst.coeffs, inst.cluster)) {
      return ev.violated = "memory", ev;
    }
    makespan = std::max(makespan, group_time(load, inst.coeffs));
  }
  ev.feasible = true;
  ev.makespan = makespan;
  return ev;
}

lp::Model build_model(const MilpInstance& instance) {
  const Presolved ps = presolve(instance);
  if (!ps.infeasible.empty()) return {};
  return make_model(instance, ps);
}

std::vector<std::string> describe_constraints(const MilpInstance& instance) {
  return build_model(instance).describe_rows();
}

MilpSolution solve(const MilpInstance& inst) {
  const auto start = Clock::now();
  MilpSolution sol;
  const int P = inst.slot_count();
  const int Q = inst.bucket_count();
  sol.m.assign(P, 0);
  sol.A.assign(Q, std::vector<int>(P, 0));

  const Presolved ps = presolve(inst);
  if (!ps.infeasible.empty()) {
    sol.infeasible_family = ps.infeasible;
    sol.wall_time = seconds_since(start);
    return sol;
  }
  const lp::Model model = make_model(inst, ps);
  const int nvars = ps.var_count;

  Incumbent inc;
  seed_homogeneous(inst, ps, inc);

  std::vector<double> root_lo(nvars), root_hi(nvars);
  for (int j = 0; j < nvars; ++j) {
    root_lo[j] = model.vars[j].lower;
    root_hi[j] = model.vars[j].upper;
  }
  const auto cold = std::make_shared<const lp::DualSimplex>(model);
  const std::size_t snapshot_bytes =
      sizeof(double) * static_cast<std::size_t>(cold->rows()) *
          (cold->structurals() + cold->rows()) + 1;
  const std::size_t cache_cap = std::max<std::size_t>(8, kCacheBytes / snapshot_bytes);
  std::map<long, CacheEntry> cache;

  auto to_solution = [&](const std::vector<double>& x, std::vector<int>& m,
                         std::vector<std::vector<int>>& A) {
    m.assign(P, 0);
    A.assign(Q, std::vector<int>(P, 0));
    for (int p : ps.kept) m[p] = static_cast<int>(std::lround(x[ps.m_var[p]]));
    for (int q = 0; q < Q; ++q) {
      for (int p : ps.kept) {
        if (ps.a_var[q][p] >= 0) A[q][p] = static_cast<int>(std::lround(x[ps.a_var[q][p]]));
      }
    }
  };
  auto prunable = [&](double bound) {
    return inc.found() && bound >= inc.value - kRelGap * std::abs(inc.value);
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  open.push(Node{0, -1, ps.c_lower, nullptr});
  long next_id = 1;
  bool limit_hit = false;
  std::vector<double> lo(nvars), hi(nvars);
  std::set<std::vector<int>> tried;
  const auto& slots = inst.catalog.slots;

  while (!open.empty()) {
    if (sol.node_count >= inst.options.node_limit ||
        (inst.options.time_limit && seconds_since(start) >= *inst.options.time_limit)) {
      limit_hit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (prunable(node.bound)) break;  // best-bound order: the rest is no better
    ++sol.node_count;

    lo = root_lo;
    hi = root_hi;
    for (const BoundChange* c = node.changes.get(); c; c = c->parent.get()) {
      // The deepest change on a variable is the tightest one.
      if (c->upper) hi[c->var] = std::min(hi[c->var], c->value);
      else lo[c->var] = std::max(lo[c->var], c->value);
    }

    std::shared_ptr<const lp::DualSimplex> parent_tableau = cold;
    if (auto it = cache.find(node.parent); it != cache.end()) {
      parent_tableau = it->second.tableau;
      if (--it->second.pending == 0) cache.erase(it);
    }
    auto simplex = std::make_shared<lp::DualSimplex>(*parent_tableau);
    lp::LpResult res = simplex->solve(lo, hi);
    if (res.status == lp::LpStatus::kIterationLimit && parent_tableau != cold) {
      simplex = std::make_shared<lp::DualSimplex>(*cold);
      res = simplex->solve(lo, hi);
    }
    if (res.status != lp::LpStatus::kOptimal) continue;
    if (prunable(res.objective)) continue;

    // Most fractional selection variable first, then most fractional
    // assignment variable; ties go to the lowest index.
    const int m_count = static_cast<int>(ps.kept.size());
    int branch = -1;
    for (int pass = 0; pass < 2 && branch < 0; ++pass) {
      double best_score = kIntTol;
      const int lo_j = pass == 0 ? 0 : m_count;
      const int hi_j = pass == 0 ? m_count : nvars;
      for (int j = lo_j; j < hi_j; ++j) {
        if (!model.vars[j].integer) continue;
        const double frac = res.x[j] - std::floor(res.x[j]);
        const double score = std::min(frac, 1.0 - frac);
        if (score > best_score) {
          best_score = score;
          branch = j;
        }
      }
    }
    {
      // Selection suggested by the relaxation: integral m as is, otherwise
      // slots by decreasing m while devices remain.
      std::vector<int> order(ps.kept.begin(), ps.kept.end());
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return res.x[ps.m_var[a]] > res.x[ps.m_var[b]];
      });
      std::vector<int> chosen;
      long devices = 0;
      for (int p : order) {
        if (res.x[ps.m_var[p]] <= kIntTol) break;
        if (devices + slots[p].degree > inst.cluster.total_devices) continue;
        devices += slots[p].degree;
        chosen.push_back(p);
      }
      std::sort(chosen.begin(), chosen.end());
      if (tried.insert(chosen).second) try_selection(inst, ps, chosen, inc);
    }
    if (branch < 0) {
      std::vector<int> m;
      std::vector<std::vector<int>> A;
      to_solution(res.x, m, A);
      offer(inst, std::move(m), A, inc);
      continue;
    }

    const double v = res.x[branch];
    const double bound = std::max(node.bound, res.objective);
    const long down_id = next_id++;
    const long up_id = next_id++;
    open.push(Node{down_id, node.id, bound,
                   std::make_shared<const BoundChange>(
                       BoundChange{branch, true, std::floor(v), node.changes})});
    open.push(Node{up_id, node.id, bound,
                   std::make_shared<const BoundChange>(
                       BoundChange{branch, false, std::ceil(v), node.changes})});
    cache[node.id] = CacheEntry{std::move(simplex), 2};
    while (cache.size() > cache_cap) cache.erase(cache.begin());
  }

  sol.wall_time = seconds_since(start);
  if (inc.found()) {
    sol.m = inc.m;
    sol.A = inc.A;
    sol.objective = inc.value;
    sol.status = limit_hit ? kStatusIncumbent : kStatusOptimal;
  } else {
    sol.status = limit_hit ? kStatusNoSolution : kStatusInfeasible;
    if (!limit_hit) sol.infeasible_family = classify_infeasible(ps);
  }
  return sol;
}

MilpSolution solve_bruteforce(const MilpInstance& inst) {
  const auto start = Clock::now();
  const int P = inst.slot_count();
  const int Q = inst.bucket_count();
  if (P > 7 || Q > 3 || inst.buckets.total_count() > 6) {
    throw InvalidInput("solve_bruteforce: instance too large (P <= 7, Q <= 3, sum b <= 6)");
  }
  MilpSolution sol;
  sol.m.assign(P, 0);
  sol.A.assign(Q, std::vector<int>(P, 0));
  const Presolved ps = presolve(inst);
  if (!ps.infeasible.empty()) {
    sol.infeasible_family = ps.infeasible;
    sol.wall_time = seconds_since(start);
    return sol;
  }

  Incumbent inc;
  for (unsigned mask = 1; mask < (1u << P); ++mask) {
    std::vector<int> m(P, 0);
    std::vector<int> selected;
    for (int p = 0; p < P; ++p) {
      if (mask >> p & 1u) {
        m[p] = 1;
        selected.push_back(p);
      }
    }
    const int S = static_cast<int>(selected.size());
    std::vector<std::vector<int>> A(Q, std::vector<int>(P, 0));
    // Odometer over compositions of each b_q into S ordered parts.
    std::vector<std::vector<int>> parts(Q, std::vector<int>(S, 0));
    for (int q = 0; q < Q; ++q) parts[q][S - 1] = inst.buckets.counts[q];
    // Lexicographic successor of a composition; false after the last one.
    auto next_composition = [S](std::vector<int>& c) {
      int tail = c[S - 1];
      for (int i = S - 2; i >= 0; --i) {
        if (tail > 0) {
          ++c[i];
          for (int j = i + 1; j < S; ++j) c[j] = 0;
          c[S - 1] = tail - 1;
          return true;
        }
        tail += c[i];
      }
      return false;
    };
    for (;;) {
      for (int q = 0; q < Q; ++q) {
        for (int k = 0; k < S; ++k) A[q][selected[k]] = parts[q][k];
      }
      ++sol.node_count;
      const Evaluation ev = evaluate(inst, m, A);
      if (ev.feasible && ev.makespan < inc.value) {
        inc.value = ev.makespan;
        inc.m = m;
        inc.A = A;
      }
      int q = Q - 1;
      while (q >= 0 && !next_composition(parts[q])) {
        std::fill(parts[q].begin(), parts[q].end(), 0);
        parts[q][S - 1] = inst.buckets.counts[q];
        --q;
      }
      if (q < 0) break;
    }
  }
  sol.wall_time = seconds_since(start);
  if (inc.found()) {
    drop_empty(inst, inc.m, inc.A);
    sol.m = inc.m;
    sol.A = inc.A;
    sol.objective = inc.value;
    sol.status = kStatusOptimal;
  } else {
    sol.infeasible_family = classify_infeasible(ps);
  }
  return sol;
}

MicroBatchPlan extract_plan(const MilpSolution& solution, const MilpInstance& inst,
                            std::span<const Tokens> original_lengths) {
  if (!solution.has_solution()) {
    throw Infeasible("extract_plan: solution has status " + solution.status);
  }
  const int P = inst.slot_count();
  const int Q = inst.bucket_count();
  const auto& slots = inst.catalog.slots;
  std::vector<std::vector<int>> dispatched(P);
  for (int q = 0; q < Q; ++q) {
    std::vector<int> members = inst.buckets.member_indices[q];
    for (int idx : members) {
      if (idx < 0 || static_cast<std::size_t>(idx) >= original_lengths.size()) {
        throw InvalidInput("extract_plan: bucket member index out of range");
      }
    }
    std::stable_sort(members.begin(), members.end(), [&](int a, int b) {
      return original_lengths[a] > original_lengths[b];
    });
    std::vector<int> remaining(solution.A[q].begin(), solution.A[q].end());
    for (int idx : members) {
      int best = -1;
      for (int p = 0; p < P; ++p) {
        if (remaining[p] > 0 && (best < 0 || remaining[p] > remaining[best])) best = p;
      }
      if (best < 0) throw InvalidInput("extract_plan: assignment does not cover bucket members");
      --remaining[best];
      dispatched[best].push_back(idx);
    }
  }

  MicroBatchPlan plan;
  for (int q = 0; q < Q; ++q) {
    const auto& members = inst.buckets.member_indices[q];
    plan.sequence_indices.insert(plan.sequence_indices.end(), members.begin(), members.end());
  }
  std::sort(plan.sequence_indices.begin(), plan.sequence_indices.end());
  plan.buckets = inst.buckets;
  plan.group_selection = solution.m;
  plan.assignment = solution.A;
  plan.predicted_makespan = solution.objective;
  plan.status = solution.status;
  for (int p = 0; p < P; ++p) {
    if (!solution.m[p]) continue;
    SelectedGroup group{slots[p].slot_id, slots[p].degree, slots[p].bandwidth, dispatched[p], {}};
    const GroupLoad bucketed{expand_load(inst, solution.A, p), slots[p].degree, slots[p].bandwidth};
    GroupLoad actual{{}, slots[p].degree, slots[p].bandwidth};
    Tokens true_total = 0;
    for (int idx : dispatched[p]) {
      actual.token_lengths.push_back(original_lengths[idx]);
      true_total += original_lengths[idx];
    }
    group.breakdown.comp_time = comp_time(bucketed, inst.coeffs);
    group.breakdown.comm_time = comm_time(bucketed, inst.coeffs);
    group.breakdown.memory_bytes = memory_bytes(bucketed, inst.coeffs);
    group.breakdown.true_time = group_time(actual, inst.coeffs);
    group.breakdown.true_memory_bytes = memory_bytes(actual, inst.coeffs);
    if (!fits_memory(true_total, slots[p].degree, inst.coeffs, inst.cluster) ||
        group.breakdown.true_memory_bytes > group.breakdown.memory_bytes) {
      plan.plan_warning = true;
    }
    plan.selected_groups.push_back(std::move(group));
  }
  return plan;
}

}  // namespace hetsp
