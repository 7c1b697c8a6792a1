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

#include "hetsp/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hetsp/baselines.hpp"
#include "hetsp/bucketing.hpp"
#include "hetsp/cost_model.hpp"
#include "hetsp/io.hpp"
#include "hetsp/simulator.hpp"
#include "hetsp/workflow.hpp"
#include "json.hpp"

namespace hetsp::cli {

namespace {

namespace fs = std::filesystem;

// Default branch-and-bound node budget per micro-batch for CLI runs. Node
// limits keep results reproducible, unlike wall-clock limits.
constexpr long kDefaultNodeLimit = 1000;

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(9);
  os << v;
  return os.str();
}

template <typename T>
T parse_number(const std::string& text, const char* what) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw InvalidInput(std::string(what) + ": cannot parse '" + text + "'");
  }
  return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

// gen:lognormal:MU,SIGMA:COUNT:BATCHES:MAXLEN:SEED
std::vector<SequenceBatch> generate_from_spec(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.size() != 7 || parts[0] != "gen") {
    throw InvalidInput("batches: expected gen:DIST:PARAMS:COUNT:BATCHES:MAXLEN:SEED, got '" +
                       spec + "'");
  }
  const LengthDistribution dist = parse_distribution(parts[1] + ":" + parts[2]);
  const int count = parse_number<int>(parts[3], "gen count");
  const int batches = parse_number<int>(parts[4], "gen batches");
  const Tokens max_len = parse_number<Tokens>(parts[5], "gen max_len");
  const auto seed = parse_number<std::uint64_t>(parts[6], "gen seed");
  return gen_longtail(batches, count, dist, max_len, seed);
}

std::string json_array(const std::vector<std::string>& objects) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& o : objects) arr.push_back(nlohmann::ordered_json::parse(o));
  return arr.dump(2) + "\n";
}

struct PlanArgs {
  std::string lengths, cluster, coeffs, out, metrics, strategy = "flexsp";
  int q = kDefaultBucketCount;
  int trials = 5;
  int jobs = 1;
  long node_limit = kDefaultNodeLimit;
  std::optional<double> time_limit;
  int max_degree = 0;
  int degree_divisor = 0;
  std::optional<Tokens> context_window;
  bool strict_devices = false;
  bool dump_milp = false;
};

struct SimArgs {
  std::string batches, cluster, coeffs, out, strategies = "flexsp,batch_ada";
  std::string degree_csv, svg;
  int warmup = 0;
  int iters = 0;
  int q = kDefaultBucketCount;
  int trials = 5;
  int jobs = 1;
  long node_limit = kDefaultNodeLimit;
  std::optional<Tokens> context_window;
  bool strict_devices = false;
  bool charge_solve_time = false;
};

struct FitArgs {
  std::string profile, out, base;
  bool no_memory = false;
  bool allow_unidentifiable = false;
};

struct GenArgs {
  std::string dist = "lognormal:8,1", out;
  int count = 64;
  int batches = 1;
  Tokens max_len = 131072;
  std::uint64_t seed = 0;
};

struct BucketArgs {
  std::string lengths, method = "dp", out;
  int q = kDefaultBucketCount;
};

struct CompareArgs {
  std::string plans, out;
};

WorkflowConfig workflow_config(int q, int trials, int jobs, long node_limit, bool strict) {
  WorkflowConfig config;
  config.bucket_count = q;
  config.trials = trials;
  config.jobs = jobs;
  config.planner.node_limit = node_limit;
  config.planner.strict_device_equality = strict;
  return config;
}

int run_plan(const PlanArgs& a, std::ostream& out) {
  const ClusterSpec cluster = io::cluster_from_json(io::read_file(a.cluster));
  const CostCoefficients coeffs = io::coeffs_from_json(io::read_file(a.coeffs));
  const auto batches = io::parse_batches(io::read_file(a.lengths));
  const StrategySpec strategy = parse_strategy(a.strategy);

  WorkflowConfig config = workflow_config(a.q, a.trials, a.jobs, a.node_limit, a.strict_devices);
  config.planner.time_limit = a.time_limit;
  config.planner.max_degree = a.max_degree;
  config.planner.degree_divisor = a.degree_divisor;
  config.keep_milp = a.dump_milp;
  BaselineOptions baseline;
  baseline.context_window = a.context_window;

  std::vector<Plan> plans;
  std::vector<SolveDiagnostics> diagnostics;
  if (strategy.name == "flexsp") {
    plans = solve_stream(batches, cluster, coeffs, config, &diagnostics);
  } else {
    for (const auto& b : batches) {
      plans.push_back(strategy.name == "batch_ada"
                          ? plan_batch_ada(b, cluster, coeffs, baseline)
                          : plan_static(b, cluster, coeffs, strategy.degree, baseline));
    }
  }

  const bool single = plans.size() == 1;
  if (!single) fs::create_directories(a.out);
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const std::string path =
        single ? a.out : (fs::path(a.out) / (plans[i].batch_id + ".json")).string();
    io::write_file(path, io::to_json(plans[i]));
    if (a.dump_milp && i < diagnostics.size()) {
      std::vector<std::string> dumps;
      for (std::size_t j = 0; j < diagnostics[i].instances.size(); ++j) {
        dumps.push_back(io::to_json(diagnostics[i].instances[j], diagnostics[i].solutions[j]));
      }
      const std::string milp_path =
          single ? a.out + ".milp.json"
                 : (fs::path(a.out) / (plans[i].batch_id + ".milp.json")).string();
      io::write_file(milp_path, json_array(dumps));
    }
    out << plans[i].batch_id << " " << plans[i].strategy << " predicted_total_time="
        << fmt(plans[i].predicted_total_time) << " groups=" << groups_summary(plans[i]) << "\n";
  }
  if (!a.metrics.empty()) io::write_file(a.metrics, io::metrics_csv(diagnostics));
  return kExitOk;
}

int run_simulate(const SimArgs& a, std::ostream& out) {
  const ClusterSpec cluster = io::cluster_from_json(io::read_file(a.cluster));
  const CostCoefficients coeffs = io::coeffs_from_json(io::read_file(a.coeffs));
  const auto batches = a.batches.rfind("gen:", 0) == 0 ? generate_from_spec(a.batches)
                                                       : io::parse_batches(io::read_file(a.batches));
  const auto strategies = parse_strategies(a.strategies);

  SimConfig config;
  config.warmup = a.warmup;
  config.iters = a.iters;
  config.workflow = workflow_config(a.q, a.trials, a.jobs, a.node_limit, a.strict_devices);
  config.context_window = a.context_window;
  config.charge_solve_time = a.charge_solve_time;

  const SimReport report = run_sim(batches, cluster, coeffs, strategies, config);
  io::write_file(a.out, io::report_csv(report));
  if (!a.degree_csv.empty()) io::write_file(a.degree_csv, io::degree_lengths_csv(report));
  if (!a.svg.empty()) io::write_file(a.svg, degree_histogram_svg(report));

  for (std::size_t s = 0; s < report.strategies.size(); ++s) {
    out << report.strategies[s] << " mean_time=" << fmt(report.mean_time[s]) << "\n";
  }
  if (report.speedup_vs_static > 0) out << "speedup_vs_static=" << fmt(report.speedup_vs_static) << "\n";
  if (report.speedup_vs_batch_ada > 0) {
    out << "speedup_vs_batch_ada=" << fmt(report.speedup_vs_batch_ada) << "\n";
  }
  return kExitOk;
}

int run_fit(const FitArgs& a, std::ostream& out) {
  const auto records = io::parse_profile_csv(io::read_file(a.profile));
  FitOptions options;
  options.fit_memory = !a.no_memory;
  options.require_identifiable = !a.allow_unidentifiable;
  CostCoefficients base;
  if (!a.base.empty()) base = io::coeffs_from_json(io::read_file(a.base));
  const FitResult fit = fit_coefficients(records, options, base);
  io::write_file(a.out, io::to_json(fit.coeffs));
  out << "max_rel_err=" << fmt(fit.max_rel_error) << " comp=" << fmt(fit.max_rel_error_comp)
      << " comm=" << fmt(fit.max_rel_error_comm) << "\n";
  for (const auto& c : fit.clamped) out << "clamped " << c << "\n";
  for (const auto& w : fit.warnings) out << "warning " << one_line(w) << "\n";
  return kExitOk;
}

int run_gen(const GenArgs& a, std::ostream& out) {
  const auto batches =
      gen_longtail(a.batches, a.count, parse_distribution(a.dist), a.max_len, a.seed);
  io::write_file(a.out, io::batches_to_jsonl(batches));
  const LengthSummary s = summarize_lengths(batches);
  out << "sequences=" << s.count << " mean=" << fmt(s.mean) << " max=" << s.max
      << " below_8k=" << fmt(s.fraction_below_8k) << " above_32k=" << fmt(s.fraction_above_32k)
      << "\n";
  return kExitOk;
}

int run_bucket(const BucketArgs& a, std::ostream& out) {
  const auto lengths = io::parse_lengths(io::read_file(a.lengths));
  if (lengths.empty()) throw InvalidInput("bucket: no lengths");
  BucketSet buckets;
  if (a.method == "dp") {
    buckets = bucket_dp(lengths, a.q);
  } else if (a.method == "naive") {
    buckets = bucket_naive(lengths, a.q);
  } else if (a.method == "brute") {
    buckets = bucket_bruteforce(lengths, a.q);
  } else {
    throw InvalidInput("bucket: unknown method '" + a.method + "'");
  }
  io::write_file(a.out, io::to_json(buckets));
  out << "buckets=" << buckets.size() << " total_error=" << buckets.total_error
      << " relative_error=" << fmt(relative_token_error(buckets, lengths)) << "\n";
  return kExitOk;
}

int run_compare(const CompareArgs& a, std::ostream& out) {
  if (!fs::is_directory(a.plans)) throw InvalidInput("compare: not a directory: " + a.plans);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(a.plans)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    if (name.size() > 10 && name.ends_with(".milp.json")) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  struct Row {
    std::string file;
    Plan plan;
  };
  std::vector<Row> rows;
  for (const auto& f : files) {
    try {
      rows.push_back({f.filename().string(), io::plan_from_json(io::read_file(f.string()))});
    } catch (const InvalidInput& e) {
      throw InvalidInput(f.filename().string() + ": " + e.what());
    }
  }
  std::string csv =
      "file,batch_id,strategy,static_degree,micro_batch_count,predicted_total_time,"
      "relative_to_best,groups\n";
  for (const auto& r : rows) {
    double best = r.plan.predicted_total_time;
    for (const auto& o : rows) {
      if (o.plan.batch_id == r.plan.batch_id) best = std::min(best, o.plan.predicted_total_time);
    }
    const double rel = best > 0 ? r.plan.predicted_total_time / best : 1.0;
    csv += csv_quote(r.file) + "," + csv_quote(r.plan.batch_id) + "," + r.plan.strategy + "," +
           std::to_string(r.plan.static_degree) + "," +
           std::to_string(r.plan.micro_batches.size()) + "," + fmt(r.plan.predicted_total_time) +
           "," + fmt(rel) + "," + csv_quote(groups_summary(r.plan)) + "\n";
  }
  io::write_file(a.out, csv);
  out << "plans=" << rows.size() << "\n";
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heterogeneity-adaptive sequence-parallel planner"};
  app.name("hetsp");
  app.require_subcommand(1);

  PlanArgs plan;
  auto* p = app.add_subcommand("plan", "Plan one or more batches");
  p->add_option("--lengths", plan.lengths, "Lengths file or batches JSONL")->required();
  p->add_option("--cluster", plan.cluster, "Cluster JSON")->required();
  p->add_option("--coeffs", plan.coeffs, "Coefficients JSON")->required();
  p->add_option("--out", plan.out, "Plan JSON, or a directory for several batches")->required();
  p->add_option("--strategy", plan.strategy, "flexsp | batch_ada | static:D");
  p->add_option("--q", plan.q, "Bucket count")->check(CLI::PositiveNumber);
  p->add_option("--trials", plan.trials, "Micro-batch counts tried")->check(CLI::PositiveNumber);
  p->add_option("--jobs", plan.jobs, "Worker threads")->check(CLI::PositiveNumber);
  p->add_option("--node-limit", plan.node_limit, "Branch-and-bound nodes per micro-batch")
      ->check(CLI::PositiveNumber);
  p->add_option("--time-limit", plan.time_limit, "Seconds per micro-batch solve");
  p->add_option("--max-degree", plan.max_degree, "Largest admissible SP degree");
  p->add_option("--degree-divisor", plan.degree_divisor, "Degrees must divide this");
  p->add_option("--context-window", plan.context_window, "Packing window for baselines");
  p->add_flag("--strict-devices", plan.strict_devices, "Use every device");
  p->add_flag("--dump-milp", plan.dump_milp, "Write <out>.milp.json");
  p->add_option("--metrics", plan.metrics, "Solver metrics CSV");

  SimArgs sim;
  auto* s = app.add_subcommand("simulate", "Compare strategies over a batch stream");
  s->add_option("--batches", sim.batches, "Batches JSONL or gen:DIST:PARAMS:K:B:MAXLEN:SEED")
      ->required();
  s->add_option("--cluster", sim.cluster, "Cluster JSON")->required();
  s->add_option("--coeffs", sim.coeffs, "Coefficients JSON")->required();
  s->add_option("--out", sim.out, "Report CSV")->required();
  s->add_option("--strategies", sim.strategies, "Comma-separated strategies");
  s->add_option("--warmup", sim.warmup, "Unmeasured leading batches")->check(CLI::NonNegativeNumber);
  s->add_option("--iters", sim.iters, "Measured batches, 0 for all")->check(CLI::NonNegativeNumber);
  s->add_option("--q", sim.q, "Bucket count")->check(CLI::PositiveNumber);
  s->add_option("--trials", sim.trials, "Micro-batch counts tried")->check(CLI::PositiveNumber);
  s->add_option("--jobs", sim.jobs, "Worker threads")->check(CLI::PositiveNumber);
  s->add_option("--node-limit", sim.node_limit, "Branch-and-bound nodes per micro-batch")
      ->check(CLI::PositiveNumber);
  s->add_option("--context-window", sim.context_window, "Packing window for baselines");
  s->add_flag("--strict-devices", sim.strict_devices, "Use every device");
  s->add_flag("--charge-solve-time", sim.charge_solve_time, "Add planning time to overhead");
  s->add_option("--degree-csv", sim.degree_csv, "Per-degree assigned lengths CSV");
  s->add_option("--svg", sim.svg, "Per-degree length histogram SVG");

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Fit cost coefficients from a profile");
  f->add_option("--profile", fit.profile, "Profile CSV")->required();
  f->add_option("--out", fit.out, "Coefficients JSON")->required();
  f->add_option("--base", fit.base, "Coefficients JSON supplying unfitted terms");
  f->add_flag("--no-memory", fit.no_memory, "Keep memory terms from --base");
  f->add_flag("--allow-unidentifiable", fit.allow_unidentifiable,
              "Minimum-norm fit instead of an error on rank deficiency");

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate long-tail batches");
  g->add_option("--dist", gen.dist, "lognormal:MU,SIGMA or pareto:ALPHA,FLOOR");
  g->add_option("--count", gen.count, "Sequences per batch")->check(CLI::PositiveNumber);
  g->add_option("--batches", gen.batches, "Batch count")->check(CLI::PositiveNumber);
  g->add_option("--max-len", gen.max_len, "Length cap")->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.seed, "RNG seed");
  g->add_option("--out", gen.out, "Batches JSONL")->required();

  BucketArgs bucket;
  auto* b = app.add_subcommand("bucket", "Bucket a lengths file");
  b->add_option("--lengths", bucket.lengths, "Lengths file")->required();
  b->add_option("--q", bucket.q, "Bucket count")->check(CLI::PositiveNumber);
  b->add_option("--method", bucket.method, "dp | naive | brute");
  b->add_option("--out", bucket.out, "Buckets JSON")->required();

  CompareArgs compare;
  auto* c = app.add_subcommand("compare", "Summarize a directory of plans");
  c->add_option("--plans", compare.plans, "Directory of plan JSON files")->required();
  c->add_option("--out", compare.out, "Summary CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: input: " << one_line(e.what()) << "\n";
    return kExitInput;
  }

  try {
    if (p->parsed()) return run_plan(plan, out);
    if (s->parsed()) return run_simulate(sim, out);
    if (f->parsed()) return run_fit(fit, out);
    if (g->parsed()) return run_gen(gen, out);
    if (b->parsed()) return run_bucket(bucket, out);
    return run_compare(compare, out);
  } catch (const Infeasible& e) {
    err << "error: infeasible: " << one_line(e.what()) << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "error: input: " << one_line(e.what()) << "\n";
    return kExitInput;
  }
}

int cli_main(int argc, const char* const* argv) {
  return cli_main(argc, argv, std::cout, std::cerr);
}

}  // namespace hetsp::cli
