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

#include "hetsp/simulator.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "hetsp/baselines.hpp"

namespace hetsp {

namespace {

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw InvalidInput(std::string(what) + ": not an integer: '" + std::string(text) + "'");
  }
  return value;
}

double parse_double(std::string_view text, std::string_view what) {
  const std::string s(text);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw InvalidInput(std::string(what) + ": not a number: '" + s + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct Outcome {
  bool feasible = false;
  Plan plan;
  double solve_time = 0.0;
};

}  // namespace

std::string StrategySpec::label() const {
  return name == "static" ? "static:" + std::to_string(degree) : name;
}

StrategySpec parse_strategy(std::string_view text) {
  text = trim(text);
  if (text == "flexsp" || text == "batch_ada") return StrategySpec{std::string(text), 0};
  if (text.starts_with("static:")) {
    const int d = parse_int(text.substr(7), "strategy degree");
    if (!is_power_of_two(d)) throw InvalidInput("strategy: static degree must be a power of two");
    return StrategySpec{"static", d};
  }
  throw InvalidInput("unknown strategy '" + std::string(text) +
                     "' (expected flexsp, batch_ada or static:D)");
}

std::vector<StrategySpec> parse_strategies(std::string_view text) {
  std::vector<StrategySpec> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(parse_strategy(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (out.empty()) throw InvalidInput("no strategies given");
  return out;
}

SimReport run_sim(std::span<const SequenceBatch> batches, const ClusterSpec& cluster,
                  const CostCoefficients& coeffs, std::span<const StrategySpec> strategies,
                  const SimConfig& config) {
  if (strategies.empty()) throw InvalidInput("run_sim: no strategies");
  if (config.warmup < 0 || config.iters < 0) throw InvalidInput("run_sim: negative iteration counts");
  cluster.validate();
  coeffs.validate(cluster);
  const std::size_t B = batches.size();
  const std::size_t S = strategies.size();
  const BaselineOptions baseline{config.context_window};

  WorkflowConfig wf = config.workflow;
  std::vector<Outcome> outcomes(B * S);
  WorkerPool pool(wf.jobs);
  pool.parallel_for(B * S, [&](std::size_t task) {
    const auto& batch = batches[task / S];
    const auto& strategy = strategies[task % S];
    Outcome& out = outcomes[task];
    const auto start = std::chrono::steady_clock::now();
    try {
      if (strategy.name == "flexsp") {
        WorkflowConfig local = wf;
        local.jobs = 1;
        out.plan = solve_batch(batch, cluster, coeffs, local);
      } else if (strategy.name == "batch_ada") {
        out.plan = plan_batch_ada(batch, cluster, coeffs, baseline);
      } else {
        out.plan = plan_static(batch, cluster, coeffs, strategy.degree, baseline);
      }
      out.feasible = true;
    } catch (const Infeasible&) {
      out.feasible = false;
    }
    out.solve_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  SimReport report;
  for (const auto& s : strategies) report.strategies.push_back(s.label());
  const std::size_t first = std::min<std::size_t>(config.warmup, B);
  const std::size_t last =
      config.iters > 0 ? std::min<std::size_t>(B, first + config.iters) : B;
  std::vector<double> sums(S, 0.0);
  std::vector<std::size_t> counted(S, 0);
  const double nodes = static_cast<double>(cluster.total_devices) / cluster.devices_per_node;

  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t s = 0; s < S; ++s) {
      const Outcome& out = outcomes[b * S + s];
      SimRow row;
      row.iteration = static_cast<int>(b);
      row.strategy = report.strategies[s];
      row.feasible = out.feasible;
      if (out.feasible) {
        for (const auto& mb : out.plan.micro_batches) {
          const SelectedGroup* critical = mb.critical_group();
          if (critical) {
            row.comp_time += critical->breakdown.comp_time;
            row.comm_time += critical->breakdown.comm_time;
          }
          row.overhead_time += coeffs.zero_overhead;
        }
        row.predicted_time = out.plan.predicted_total_time;
        if (config.charge_solve_time && strategies[s].name == "flexsp") {
          const double charged = out.solve_time / nodes;
          row.overhead_time += charged;
          row.predicted_time += charged;
        }
        row.micro_batch_count = static_cast<int>(out.plan.micro_batches.size());
        row.groups = groups_summary(out.plan);
        if (b >= first && b < last) {
          sums[s] += row.predicted_time;
          ++counted[s];
          if (strategies[s].name == "flexsp") {
            for (const auto& mb : out.plan.micro_batches) {
              for (const auto& g : mb.selected_groups) {
                for (int idx : g.sequences) {
                  report.degree_lengths.push_back(
                      DegreeLength{static_cast<int>(b), g.degree, batches[b].lengths[idx]});
                }
              }
            }
          }
        }
      }
      report.rows.push_back(std::move(row));
    }
  }
  report.mean_time.resize(S, std::nan(""));
  for (std::size_t s = 0; s < S; ++s) {
    if (counted[s] > 0) report.mean_time[s] = sums[s] / static_cast<double>(counted[s]);
  }
  // Ratios use the iterations where both strategies are feasible.
  auto paired_ratio = [&](std::size_t base, std::size_t flex) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t b = first; b < last; ++b) {
      const Outcome& x = outcomes[b * S + base];
      const Outcome& y = outcomes[b * S + flex];
      if (!x.feasible || !y.feasible) continue;
      num += report.rows[b * S + base].predicted_time;
      den += report.rows[b * S + flex].predicted_time;
    }
    return den > 0.0 ? num / den : std::nan("");
  };
  std::optional<std::size_t> flex;
  for (std::size_t s = 0; s < S; ++s) {
    if (strategies[s].name == "flexsp") flex = s;
  }
  if (flex) {
    double best_static = std::nan("");
    auto always_feasible = [&](std::size_t s) {
      for (std::size_t b = first; b < last; ++b) {
        if (!outcomes[b * S + s].feasible) return false;
      }
      return true;
    };
    for (std::size_t s = 0; s < S; ++s) {
      if (strategies[s].name == "static") {
        if (!always_feasible(s)) continue;
        const double r = paired_ratio(s, *flex);
        if (std::isnan(best_static) || r < best_static) best_static = r;
      } else if (strategies[s].name == "batch_ada") {
        report.speedup_vs_batch_ada = paired_ratio(s, *flex);
      }
    }
    report.speedup_vs_static = best_static;
  }
  return report;
}

LengthDistribution parse_distribution(std::string_view text) {
  text = trim(text);
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw InvalidInput("distribution must look like lognormal:MU,SIGMA or pareto:ALPHA,FLOOR");
  }
  const std::string_view kind = text.substr(0, colon);
  const std::string_view params = text.substr(colon + 1);
  const auto comma = params.find(',');
  if (comma == std::string_view::npos) throw InvalidInput("distribution needs two parameters");
  LengthDistribution dist;
  dist.a = parse_double(params.substr(0, comma), "distribution parameter");
  dist.b = parse_double(params.substr(comma + 1), "distribution parameter");
  if (kind == "lognormal") {
    dist.kind = LengthDistribution::Kind::kLognormal;
    if (!(dist.b > 0.0)) throw InvalidInput("lognormal sigma must be positive");
  } else if (kind == "pareto") {
    dist.kind = LengthDistribution::Kind::kPareto;
    if (!(dist.a > 0.0) || !(dist.b >= 1.0)) {
      throw InvalidInput("pareto needs alpha > 0 and floor >= 1");
    }
  } else {
    throw InvalidInput("unknown distribution '" + std::string(kind) + "'");
  }
  return dist;
}

std::vector<SequenceBatch> gen_longtail(int batches, int count, const LengthDistribution& dist,
                                        Tokens max_len, std::uint64_t seed) {
  if (batches < 0 || count < 1 || max_len < 1) {
    throw InvalidInput("gen_longtail: need batches >= 0, count >= 1, max_len >= 1");
  }
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> lognormal(dist.a, dist.b);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  auto draw = [&]() -> double {
    if (dist.kind == LengthDistribution::Kind::kLognormal) return lognormal(rng);
    const double u = 1.0 - uniform(rng);  // (0, 1]
    return dist.b * std::pow(u, -1.0 / dist.a);
  };
  std::vector<SequenceBatch> out;
  for (int b = 0; b < batches; ++b) {
    SequenceBatch batch;
    batch.batch_id = "b" + std::to_string(b);
    for (int i = 0; i < count; ++i) {
      const double x = std::round(draw());
      const double clipped = std::clamp(x, 1.0, static_cast<double>(max_len));
      batch.lengths.push_back(static_cast<Tokens>(clipped));
    }
    out.push_back(std::move(batch));
  }
  return out;
}

LengthSummary summarize_lengths(std::span<const SequenceBatch> batches) {
  LengthSummary s;
  double total = 0.0;
  std::size_t below = 0;
  std::size_t above = 0;
  for (const auto& b : batches) {
    for (Tokens len : b.lengths) {
      ++s.count;
      total += static_cast<double>(len);
      s.max = std::max(s.max, len);
      if (len < 8192) ++below;
      if (len > 32768) ++above;
    }
  }
  if (s.count > 0) {
    s.mean = total / static_cast<double>(s.count);
    s.fraction_below_8k = static_cast<double>(below) / static_cast<double>(s.count);
    s.fraction_above_32k = static_cast<double>(above) / static_cast<double>(s.count);
  }
  return s;
}

std::string degree_histogram_svg(const SimReport& report) {
  std::map<int, std::map<int, int>> bins;  // degree -> log2 bin -> count
  int max_bin = 0;
  int max_count = 1;
  for (const auto& dl : report.degree_lengths) {
    const int bin = static_cast<int>(std::floor(std::log2(static_cast<double>(dl.length))));
    max_bin = std::max(max_bin, bin);
    max_count = std::max(max_count, ++bins[dl.degree][bin]);
  }
  const int panel_h = 120;
  const int bar_w = 14;
  const int width = 80 + (max_bin + 1) * bar_w;
  const int height = 20 + static_cast<int>(bins.size()) * (panel_h + 20);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
     << height << "\">\n";
  int y0 = 20;
  for (const auto& [degree, hist] : bins) {
    os << "  <text x=\"4\" y=\"" << y0 + panel_h / 2 << "\" font-size=\"12\">SP=" << degree
       << "</text>\n";
    for (const auto& [bin, count] : hist) {
      const int h = count * (panel_h - 10) / max_count;
      os << "  <rect x=\"" << 70 + bin * bar_w << "\" y=\"" << y0 + panel_h - h
         << "\" width=\"" << bar_w - 2 << "\" height=\"" << h
         << "\" fill=\"#4a7ab0\"><title>2^" << bin << ": " << count << "</title></rect>\n";
    }
    y0 += panel_h + 20;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace hetsp
