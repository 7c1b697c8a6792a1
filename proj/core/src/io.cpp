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

#include "hetsp/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace hetsp::io {

namespace {

using Json = nlohmann::ordered_json;

Json parse(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InvalidInput(std::string(what) + ": malformed JSON: " + e.what());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

const Json& field(const Json& j, const char* key, std::string_view what) {
  if (!j.is_object()) throw InvalidInput(std::string(what) + ": expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) throw InvalidInput(std::string(what) + ": missing field '" + key + "'");
  return *it;
}

void reject_unknown(const Json& j, std::initializer_list<const char*> known, std::string_view what) {
  if (!j.is_object()) throw InvalidInput(std::string(what) + ": expected a JSON object");
  const std::set<std::string> names(known.begin(), known.end());
  for (const auto& [key, value] : j.items()) {
    if (!names.contains(key)) {
      throw InvalidInput(std::string(what) + ": unknown field '" + key + "'");
    }
  }
}

double as_double(const Json& j, std::string_view what) {
  if (!j.is_number()) throw InvalidInput(std::string(what) + ": expected a number");
  return j.get<double>();
}

std::int64_t as_int(const Json& j, std::string_view what) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.0e18) {
      return static_cast<std::int64_t>(v);
    }
  }
  throw InvalidInput(std::string(what) + ": expected an integer");
}

template <class T>
std::vector<T> int_list(const Json& j, std::string_view what) {
  if (!j.is_array()) throw InvalidInput(std::string(what) + ": expected an array");
  std::vector<T> out;
  for (const auto& v : j) out.push_back(static_cast<T>(as_int(v, what)));
  return out;
}

template <class T>
std::vector<std::vector<T>> int_matrix(const Json& j, std::string_view what) {
  if (!j.is_array()) throw InvalidInput(std::string(what) + ": expected an array");
  std::vector<std::vector<T>> out;
  for (const auto& row : j) out.push_back(int_list<T>(row, what));
  return out;
}

std::string as_string(const Json& j, std::string_view what) {
  if (!j.is_string()) throw InvalidInput(std::string(what) + ": expected a string");
  return j.get<std::string>();
}

Json bucket_json(const BucketSet& b) {
  return Json{{"upper_limits", b.upper_limits},
              {"counts", b.counts},
              {"member_indices", b.member_indices},
              {"total_error", b.total_error}};
}

BucketSet bucket_from(const Json& j) {
  BucketSet b;
  b.upper_limits = int_list<Tokens>(field(j, "upper_limits", "buckets"), "upper_limits");
  b.counts = int_list<int>(field(j, "counts", "buckets"), "counts");
  b.member_indices = int_matrix<int>(field(j, "member_indices", "buckets"), "member_indices");
  b.total_error = as_int(field(j, "total_error", "buckets"), "total_error");
  if (b.counts.size() != b.upper_limits.size() || b.member_indices.size() != b.upper_limits.size()) {
    throw InvalidInput("buckets: upper_limits, counts and member_indices differ in length");
  }
  return b;
}

Json cluster_json(const ClusterSpec& c) {
  return Json{{"total_devices", c.total_devices},
              {"devices_per_node", c.devices_per_node},
              {"intra_node_bandwidth", c.intra_node_bandwidth},
              {"inter_node_bandwidth", c.inter_node_bandwidth},
              {"memory_budget", c.memory_budget}};
}

Json coeffs_json(const CostCoefficients& c) {
  return Json{{"alpha1", c.alpha1}, {"alpha2", c.alpha2}, {"beta1", c.beta1},
              {"alpha3", c.alpha3}, {"beta2", c.beta2},   {"m_token", c.m_token},
              {"m_ms", c.m_ms},     {"zero_overhead", c.zero_overhead}};
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
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

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

Tokens parse_token(std::string_view s, std::size_t line_no) {
  const std::string str(trim(s));
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(str, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != str.size()) {
    throw InvalidInput("lengths: line " + std::to_string(line_no) + ": not an integer: '" + str +
                       "'");
  }
  return v;
}

}  // namespace

std::string to_json(const ClusterSpec& cluster) { return dump(cluster_json(cluster)); }
std::string to_json(const CostCoefficients& coeffs) { return dump(coeffs_json(coeffs)); }
std::string to_json(const BucketSet& buckets) { return dump(bucket_json(buckets)); }

ClusterSpec cluster_from_json(std::string_view text) {
  const Json j = parse(text, "cluster");
  reject_unknown(j,
                 {"total_devices", "devices_per_node", "intra_node_bandwidth",
                  "inter_node_bandwidth", "memory_budget"},
                 "cluster");
  ClusterSpec c;
  c.total_devices = static_cast<int>(as_int(field(j, "total_devices", "cluster"), "total_devices"));
  c.devices_per_node =
      static_cast<int>(as_int(field(j, "devices_per_node", "cluster"), "devices_per_node"));
  c.intra_node_bandwidth =
      as_double(field(j, "intra_node_bandwidth", "cluster"), "intra_node_bandwidth");
  c.inter_node_bandwidth =
      as_double(field(j, "inter_node_bandwidth", "cluster"), "inter_node_bandwidth");
  c.memory_budget = as_int(field(j, "memory_budget", "cluster"), "memory_budget");
  c.validate();
  return c;
}

CostCoefficients coeffs_from_json(std::string_view text) {
  const Json j = parse(text, "coefficients");
  reject_unknown(j, {"alpha1", "alpha2", "beta1", "alpha3", "beta2", "m_token", "m_ms",
                     "zero_overhead"},
                 "coefficients");
  CostCoefficients c;
  c.alpha1 = as_double(field(j, "alpha1", "coefficients"), "alpha1");
  c.alpha2 = as_double(field(j, "alpha2", "coefficients"), "alpha2");
  c.beta1 = as_double(field(j, "beta1", "coefficients"), "beta1");
  c.alpha3 = as_double(field(j, "alpha3", "coefficients"), "alpha3");
  c.beta2 = as_double(field(j, "beta2", "coefficients"), "beta2");
  c.m_token = as_int(field(j, "m_token", "coefficients"), "m_token");
  c.m_ms = as_int(field(j, "m_ms", "coefficients"), "m_ms");
  if (j.contains("zero_overhead")) c.zero_overhead = as_double(j["zero_overhead"], "zero_overhead");
  c.validate();
  return c;
}

BucketSet buckets_from_json(std::string_view text) { return bucket_from(parse(text, "buckets")); }

std::string to_json(const Plan& plan) {
  Json mbs = Json::array();
  for (const auto& mb : plan.micro_batches) {
    Json groups = Json::array();
    for (const auto& g : mb.selected_groups) {
      groups.push_back(Json{{"slot_id", g.slot_id},
                            {"degree", g.degree},
                            {"bandwidth", g.bandwidth},
                            {"sequences", g.sequences},
                            {"breakdown",
                             {{"comp_time", g.breakdown.comp_time},
                              {"comm_time", g.breakdown.comm_time},
                              {"memory_bytes", g.breakdown.memory_bytes},
                              {"true_time", g.breakdown.true_time},
                              {"true_memory_bytes", g.breakdown.true_memory_bytes}}}});
    }
    mbs.push_back(Json{{"sequence_indices", mb.sequence_indices},
                       {"buckets", bucket_json(mb.buckets)},
                       {"selected_groups", groups},
                       {"group_selection", mb.group_selection},
                       {"assignment", mb.assignment},
                       {"predicted_makespan", mb.predicted_makespan},
                       {"status", mb.status},
                       {"plan_warning", mb.plan_warning}});
  }
  return dump(Json{{"schema", plan.schema},
                   {"strategy", plan.strategy},
                   {"batch_id", plan.batch_id},
                   {"static_degree", plan.static_degree},
                   {"groups", groups_summary(plan)},
                   {"predicted_total_time", plan.predicted_total_time},
                   {"micro_batches", mbs}});
}

Plan plan_from_json(std::string_view text) {
  const Json j = parse(text, "plan");
  Plan plan;
  plan.schema = static_cast<int>(as_int(field(j, "schema", "plan"), "schema"));
  if (plan.schema != kPlanSchema) {
    throw InvalidInput("plan: unsupported schema " + std::to_string(plan.schema));
  }
  plan.strategy = as_string(field(j, "strategy", "plan"), "strategy");
  if (plan.strategy != "flexsp" && plan.strategy != "static" && plan.strategy != "batch_ada") {
    throw InvalidInput("plan: unknown strategy '" + plan.strategy + "'");
  }
  plan.batch_id = as_string(field(j, "batch_id", "plan"), "batch_id");
  plan.static_degree = static_cast<int>(as_int(field(j, "static_degree", "plan"), "static_degree"));
  plan.predicted_total_time =
      as_double(field(j, "predicted_total_time", "plan"), "predicted_total_time");
  const Json& mbs = field(j, "micro_batches", "plan");
  if (!mbs.is_array()) throw InvalidInput("plan: micro_batches must be an array");
  for (const auto& m : mbs) {
    MicroBatchPlan mb;
    mb.sequence_indices = int_list<int>(field(m, "sequence_indices", "micro_batch"), "sequence_indices");
    mb.buckets = bucket_from(field(m, "buckets", "micro_batch"));
    mb.group_selection = int_list<int>(field(m, "group_selection", "micro_batch"), "group_selection");
    mb.assignment = int_matrix<int>(field(m, "assignment", "micro_batch"), "assignment");
    mb.predicted_makespan =
        as_double(field(m, "predicted_makespan", "micro_batch"), "predicted_makespan");
    mb.status = as_string(field(m, "status", "micro_batch"), "status");
    const Json& warn = field(m, "plan_warning", "micro_batch");
    if (!warn.is_boolean()) throw InvalidInput("micro_batch: plan_warning must be a boolean");
    mb.plan_warning = warn.get<bool>();
    const Json& groups = field(m, "selected_groups", "micro_batch");
    if (!groups.is_array()) throw InvalidInput("micro_batch: selected_groups must be an array");
    for (const auto& g : groups) {
      SelectedGroup sg;
      sg.slot_id = static_cast<int>(as_int(field(g, "slot_id", "group"), "slot_id"));
      sg.degree = static_cast<int>(as_int(field(g, "degree", "group"), "degree"));
      sg.bandwidth = as_double(field(g, "bandwidth", "group"), "bandwidth");
      sg.sequences = int_list<int>(field(g, "sequences", "group"), "sequences");
      const Json& b = field(g, "breakdown", "group");
      sg.breakdown.comp_time = as_double(field(b, "comp_time", "breakdown"), "comp_time");
      sg.breakdown.comm_time = as_double(field(b, "comm_time", "breakdown"), "comm_time");
      sg.breakdown.memory_bytes = as_int(field(b, "memory_bytes", "breakdown"), "memory_bytes");
      sg.breakdown.true_time = as_double(field(b, "true_time", "breakdown"), "true_time");
      sg.breakdown.true_memory_bytes =
          as_int(field(b, "true_memory_bytes", "breakdown"), "true_memory_bytes");
      mb.selected_groups.push_back(std::move(sg));
    }
    plan.micro_batches.push_back(std::move(mb));
  }
  return plan;
}

std::string to_json(const MilpInstance& instance, const MilpSolution& solution) {
  Json slots = Json::array();
  for (const auto& s : instance.catalog.slots) {
    slots.push_back(Json{{"slot_id", s.slot_id}, {"degree", s.degree}, {"bandwidth", s.bandwidth}});
  }
  const auto& o = instance.options;
  Json options{{"strict_device_equality", o.strict_device_equality},
               {"symmetry_breaking", o.symmetry_breaking},
               {"time_limit", o.time_limit ? Json(*o.time_limit) : Json(nullptr)},
               {"node_limit", o.node_limit},
               {"max_degree", o.max_degree},
               {"degree_divisor", o.degree_divisor}};
  Json inst{{"catalog", slots},
            {"buckets", bucket_json(instance.buckets)},
            {"coeffs", coeffs_json(instance.coeffs)},
            {"cluster", cluster_json(instance.cluster)},
            {"options", options},
            {"constraints", describe_constraints(instance)}};
  Json sol{{"m", solution.m},
           {"A", solution.A},
           {"objective", solution.objective},
           {"status", solution.status},
           {"infeasible_family", solution.infeasible_family},
           {"node_count", solution.node_count},
           {"wall_time", solution.wall_time}};
  return dump(Json{{"instance", inst}, {"solution", sol}});
}

std::vector<Tokens> parse_lengths(std::string_view text) {
  std::vector<Tokens> out;
  std::size_t line_no = 0;
  for (std::string_view line : lines_of(text)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '{') {
      const Json j = parse(line, "lengths");
      out.push_back(as_int(field(j, "length", "lengths"), "length"));
    } else {
      out.push_back(parse_token(line, line_no));
    }
  }
  if (out.empty()) throw InvalidInput("lengths: no lengths found");
  return out;
}

std::vector<SequenceBatch> parse_batches(std::string_view text, const std::string& fallback_id) {
  // The first non-empty line decides the format.
  bool batch_format = false;
  for (std::string_view line : lines_of(text)) {
    line = trim(line);
    if (line.empty()) continue;
    batch_format = line.front() == '{' && parse(line, "batches").contains("lengths");
    break;
  }
  std::vector<SequenceBatch> out;
  if (!batch_format) {
    SequenceBatch b{fallback_id, parse_lengths(text)};
    b.validate();
    return {b};
  }
  for (std::string_view line : lines_of(text)) {
    line = trim(line);
    if (line.empty()) continue;
    const Json j = parse(line, "batches");
    SequenceBatch b;
    b.batch_id = j.contains("batch_id") ? as_string(j["batch_id"], "batch_id")
                                        : "b" + std::to_string(out.size());
    b.lengths = int_list<Tokens>(field(j, "lengths", "batches"), "lengths");
    b.validate();
    out.push_back(std::move(b));
  }
  return out;
}

std::string batches_to_jsonl(std::span<const SequenceBatch> batches) {
  std::string out;
  for (const auto& b : batches) {
    out += Json{{"batch_id", b.batch_id}, {"lengths", b.lengths}}.dump();
    out += "\n";
  }
  return out;
}

std::vector<ProfileRecord> parse_profile_csv(std::string_view text) {
  const auto lines = lines_of(text);
  std::size_t i = 0;
  while (i < lines.size() && trim(lines[i]).empty()) ++i;
  if (i == lines.size() || trim(lines[i]) != "tokens;degree;bandwidth;comp_s;comm_s;mem_bytes") {
    throw InvalidInput("profile: expected header tokens;degree;bandwidth;comp_s;comm_s;mem_bytes");
  }
  std::vector<ProfileRecord> out;
  for (++i; i < lines.size(); ++i) {
    const std::string_view line = trim(lines[i]);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
      if (c == ';') {
        cells.push_back(cell);
        cell.clear();
      } else {
        cell += c;
      }
    }
    cells.push_back(cell);
    const std::string where = "profile: line " + std::to_string(i + 1);
    if (cells.size() != 6) throw InvalidInput(where + ": expected 6 fields");
    ProfileRecord r;
    std::string token_list = cells[0];
    std::replace(token_list.begin(), token_list.end(), ',', ' ');
    std::istringstream tokens(token_list);
    std::string tok;
    while (tokens >> tok) r.token_lengths.push_back(parse_token(tok, i + 1));
    if (r.token_lengths.empty()) throw InvalidInput(where + ": empty token list");
    auto num = [&](const std::string& raw) {
      const std::string str(trim(raw));
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(str, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != str.size()) {
        throw InvalidInput(where + ": not a number: '" + raw + "'");
      }
      return v;
    };
    r.degree = static_cast<int>(parse_token(cells[1], i + 1));
    r.bandwidth = num(cells[2]);
    r.measured_comp_time = num(cells[3]);
    r.measured_comm_time = num(cells[4]);
    r.measured_peak_memory = num(cells[5]);
    out.push_back(std::move(r));
  }
  if (out.empty()) throw InvalidInput("profile: no records");
  return out;
}

std::string profile_to_csv(std::span<const ProfileRecord> records) {
  std::string out = "tokens;degree;bandwidth;comp_s;comm_s;mem_bytes\n";
  for (const auto& r : records) {
    for (std::size_t k = 0; k < r.token_lengths.size(); ++k) {
      if (k) out += ',';
      out += std::to_string(r.token_lengths[k]);
    }
    out += ";" + std::to_string(r.degree) + ";" + fmt_double(r.bandwidth) + ";" +
           fmt_double(r.measured_comp_time) + ";" + fmt_double(r.measured_comm_time) + ";" +
           fmt_double(r.measured_peak_memory) + "\n";
  }
  return out;
}

std::string report_csv(const SimReport& report) {
  std::string out =
      "iteration,strategy,feasible,predicted_time,comp_time,comm_time,overhead_time,"
      "micro_batch_count,groups\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.iteration) + "," + r.strategy + "," + (r.feasible ? "1" : "0") + "," +
           fmt_double(r.predicted_time) + "," + fmt_double(r.comp_time) + "," +
           fmt_double(r.comm_time) + "," + fmt_double(r.overhead_time) + "," +
           std::to_string(r.micro_batch_count) + "," + csv_quote(r.groups) + "\n";
  }
  return out;
}

std::string degree_lengths_csv(const SimReport& report) {
  std::string out = "iteration,degree,length\n";
  for (const auto& d : report.degree_lengths) {
    out += std::to_string(d.iteration) + "," + std::to_string(d.degree) + "," +
           std::to_string(d.length) + "\n";
  }
  return out;
}

std::string metrics_csv(std::span<const SolveDiagnostics> diagnostics) {
  std::string out = "batch_id,micro_batch_count,trials_evaluated,node_count,wall_time_s\n";
  for (const auto& d : diagnostics) {
    out += csv_quote(d.batch_id) + "," + std::to_string(d.micro_batch_count) + "," +
           std::to_string(d.trials_evaluated) + "," + std::to_string(d.node_count) + "," +
           fmt_double(d.wall_time) + "\n";
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << content;
  if (!out) throw InvalidInput("failed writing '" + path + "'");
}

}  // namespace hetsp::io
