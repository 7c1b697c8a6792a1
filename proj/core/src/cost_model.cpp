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

#include "hetsp/cost_model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace hetsp {

__extension__ typedef __int128 Int128;

namespace {

Tokens sum_tokens(const std::vector<Tokens>& lengths) {
  return std::accumulate(lengths.begin(), lengths.end(), Tokens{0});
}

double sum_squares(const std::vector<Tokens>& lengths) {
  double acc = 0.0;
  for (Tokens s : lengths) acc += static_cast<double>(s) * static_cast<double>(s);
  return acc;
}

}  // namespace

Bytes memory_bytes(const GroupLoad& load, const CostCoefficients& coeffs) {
  const Int128 num = static_cast<Int128>(sum_tokens(load.token_lengths)) *
                       static_cast<Int128>(coeffs.m_token);
  const Int128 d = load.degree;
  const Int128 activations = (num + d / 2) / d;
  return static_cast<Bytes>(activations) + coeffs.m_ms;
}

bool fits_memory(Tokens total_tokens, int degree, const CostCoefficients& coeffs,
                 const ClusterSpec& cluster) {
  const Int128 need = static_cast<Int128>(total_tokens) * coeffs.m_token;
  const Int128 room =
      static_cast<Int128>(cluster.memory_budget - coeffs.m_ms) * degree;
  return need <= room;
}

double comp_time(const GroupLoad& load, const CostCoefficients& coeffs) {
  double work = 0.0;
  for (Tokens s : load.token_lengths) {
    const double x = static_cast<double>(s);
    work += coeffs.alpha1 * x * x + coeffs.alpha2 * x;
  }
  return work / load.degree + coeffs.beta1;
}

double comm_time(const GroupLoad& load, const CostCoefficients& coeffs) {
  if (!(load.bandwidth > 0.0)) {
    throw InvalidInput("comm_time: bandwidth must be positive");
  }
  double volume = 0.0;
  for (Tokens s : load.token_lengths) volume += coeffs.alpha3 * static_cast<double>(s);
  return volume / (load.degree * load.bandwidth) + coeffs.beta2;
}

double group_time(const GroupLoad& load, const CostCoefficients& coeffs) {
  return comp_time(load, coeffs) + comm_time(load, coeffs) + coeffs.zero_overhead;
}

double marginal_time(Tokens s, int degree, double bandwidth,
                     const CostCoefficients& coeffs) {
  const double x = static_cast<double>(s);
  return (coeffs.alpha1 * x * x + coeffs.alpha2 * x) / degree +
         coeffs.alpha3 * x / (degree * bandwidth);
}

double startup_time(const CostCoefficients& coeffs) {
  return coeffs.beta1 + coeffs.beta2 + coeffs.zero_overhead;
}

// ---------------------------------------------------------------------------

namespace {

struct LeastSquares {
  Eigen::VectorXd solution;
  std::vector<std::string> clamped;
  bool rank_deficient = false;
};

// Column-scaled least squares; columns named in `names` are clamped to zero
// (and the rest refitted) while any coefficient comes out negative.
LeastSquares solve_nonneg(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                          const std::vector<std::string>& names, bool min_norm) {
  const Eigen::Index cols = design.cols();
  std::vector<bool> active(cols, true);
  LeastSquares out;
  out.solution = Eigen::VectorXd::Zero(cols);

  for (;;) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (active[c]) idx.push_back(c);
    }
    if (idx.empty()) break;
    Eigen::MatrixXd sub(design.rows(), static_cast<Eigen::Index>(idx.size()));
    Eigen::VectorXd scale(sub.cols());
    for (Eigen::Index k = 0; k < sub.cols(); ++k) {
      const auto col = design.col(idx[k]);
      const double norm = col.cwiseAbs().maxCoeff();
      scale[k] = norm > 0.0 ? norm : 1.0;
      sub.col(k) = col / scale[k];
    }
    Eigen::VectorXd z;
    if (min_norm) {
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sub);
      cod.setThreshold(1e-10);
      if (cod.rank() < sub.cols()) out.rank_deficient = true;
      z = cod.solve(y);
    } else {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
      qr.setThreshold(1e-10);
      if (qr.rank() < sub.cols()) out.rank_deficient = true;
      z = qr.solve(y);
    }
    out.solution.setZero();
    for (Eigen::Index k = 0; k < sub.cols(); ++k) out.solution[idx[k]] = z[k] / scale[k];

    Eigen::Index worst = -1;
    for (Eigen::Index c : idx) {
      if (out.solution[c] < 0.0 && (worst < 0 || out.solution[c] < out.solution[worst])) {
        worst = c;
      }
    }
    if (worst < 0) break;
    active[worst] = false;
    out.clamped.push_back(names[worst]);
  }
  return out;
}

Eigen::Index numeric_rank(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd scaled = m;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double norm = m.col(c).cwiseAbs().maxCoeff();
    if (norm > 0.0) scaled.col(c) /= norm;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-10);
  return qr.rank();
}

}  // namespace

FitResult fit_coefficients(std::span<const ProfileRecord> records,
                           const FitOptions& options,
                           const CostCoefficients& base) {
  const bool strict = options.require_identifiable;
  FitResult result;
  result.coeffs = base;

  for (const auto& r : records) {
    if (r.token_lengths.empty() || r.degree < 1 || !(r.bandwidth > 0.0)) {
      throw InvalidInput("fit: every profile record needs tokens, degree >= 1 and bandwidth > 0");
    }
    if (r.measured_comp_time < 0 || r.measured_comm_time < 0 ||
        r.measured_peak_memory < 0) {
      throw InvalidInput("fit: measurements must be non-negative");
    }
  }

  std::set<Tokens> totals;
  std::set<int> degrees;
  for (const auto& r : records) {
    totals.insert(sum_tokens(r.token_lengths));
    degrees.insert(r.degree);
  }
  if (strict) {
    if (records.size() < 3) {
      throw InvalidInput("fit: underdetermined, need at least 3 profile records, got " +
                         std::to_string(records.size()));
    }
    if (totals.size() < 3) {
      throw InvalidInput("fit: underdetermined, need 3 distinct total token counts "
                         "(vary batch composition)");
    }
    if (degrees.size() < 2) {
      throw InvalidInput("fit: underdetermined, need at least 2 distinct SP degrees");
    }
  } else if (records.empty()) {
    throw InvalidInput("fit: no profile records");
  }

  const auto n = static_cast<Eigen::Index>(records.size());
  Eigen::MatrixXd comp_x(n, 3), comm_x(n, 2), mem_x(n, 2);
  Eigen::VectorXd comp_y(n), comm_y(n), mem_y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    const double tokens = static_cast<double>(sum_tokens(r.token_lengths));
    comp_x(i, 0) = sum_squares(r.token_lengths) / r.degree;
    comp_x(i, 1) = tokens / r.degree;
    comp_x(i, 2) = 1.0;
    comp_y[i] = r.measured_comp_time;
    comm_x(i, 0) = tokens / (r.degree * r.bandwidth);
    comm_x(i, 1) = 1.0;
    comm_y[i] = r.measured_comm_time;
    mem_x(i, 0) = tokens / r.degree;
    mem_x(i, 1) = 1.0;
    mem_y[i] = r.measured_peak_memory;
  }

  if (numeric_rank(comp_x) < 3) {
    std::string why = numeric_rank(comp_x.leftCols(2)) < 2
                          ? "comp: quadratic and linear token terms are collinear "
                            "(records need varied sequence lengths)"
                          : "comp: token terms collinear with the startup term "
                            "(vary tokens per device)";
    if (strict) throw InvalidInput("fit: underdetermined, " + why);
    result.warnings.push_back(why);
  }
  if (numeric_rank(comm_x) < 2) {
    const std::string why =
        "comm: need two distinct tokens/(degree*bandwidth) values";
    if (strict) throw InvalidInput("fit: underdetermined, " + why);
    result.warnings.push_back(why);
  }

  // Noise is multiplicative, so fit relative residuals. Time rows are scaled
  // by 1 / (comp + comm) of their record, the quantity the error is reported on.
  auto weigh = [](Eigen::MatrixXd& x, Eigen::VectorXd& y, const Eigen::VectorXd& by) {
    const double floor = 1e-12 * std::max(1.0, by.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double w = 1.0 / std::max(by[i], floor);
      x.row(i) *= w;
      y[i] *= w;
    }
  };
  const Eigen::VectorXd total_y = comp_y + comm_y;
  const Eigen::VectorXd mem_by = mem_y;
  weigh(comp_x, comp_y, total_y);
  weigh(comm_x, comm_y, total_y);
  weigh(mem_x, mem_y, mem_by);

  const auto comp = solve_nonneg(comp_x, comp_y, {"alpha1", "alpha2", "beta1"}, !strict);
  const auto comm = solve_nonneg(comm_x, comm_y, {"alpha3", "beta2"}, !strict);
  result.coeffs.alpha1 = comp.solution[0];
  result.coeffs.alpha2 = comp.solution[1];
  result.coeffs.beta1 = comp.solution[2];
  result.coeffs.alpha3 = comm.solution[0];
  result.coeffs.beta2 = comm.solution[1];
  result.clamped = comp.clamped;
  result.clamped.insert(result.clamped.end(), comm.clamped.begin(), comm.clamped.end());

  if (options.fit_memory) {
    if (numeric_rank(mem_x) < 2) {
      const std::string why = "memory: need two distinct tokens/degree values";
      if (strict) throw InvalidInput("fit: underdetermined, " + why);
      result.warnings.push_back(why);
    }
    const auto mem = solve_nonneg(mem_x, mem_y, {"m_token", "m_ms"}, !strict);
    result.coeffs.m_token = static_cast<Bytes>(std::llround(mem.solution[0]));
    result.coeffs.m_ms = static_cast<Bytes>(std::llround(mem.solution[1]));
    result.clamped.insert(result.clamped.end(), mem.clamped.begin(), mem.clamped.end());
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = records[static_cast<std::size_t>(i)];
    const GroupLoad load{r.token_lengths, r.degree, r.bandwidth};
    const double pc = comp_time(load, result.coeffs);
    const double pm = comm_time(load, result.coeffs);
    auto rel = [](double pred, double meas) {
      if (meas == 0.0) return pred == 0.0 ? 0.0 : std::abs(pred);
      return std::abs(pred - meas) / std::abs(meas);
    };
    result.max_rel_error_comp = std::max(result.max_rel_error_comp, rel(pc, r.measured_comp_time));
    result.max_rel_error_comm = std::max(result.max_rel_error_comm, rel(pm, r.measured_comm_time));
    result.max_rel_error = std::max(
        result.max_rel_error, rel(pc + pm, r.measured_comp_time + r.measured_comm_time));
  }
  return result;
}

double max_relative_error(std::span<const ProfileRecord> records,
                          const CostCoefficients& coeffs) {
  double worst = 0.0;
  for (const auto& r : records) {
    const GroupLoad load{r.token_lengths, r.degree, r.bandwidth};
    const double pred = comp_time(load, coeffs) + comm_time(load, coeffs);
    const double meas = r.measured_comp_time + r.measured_comm_time;
    worst = std::max(worst, meas == 0.0 ? std::abs(pred) : std::abs(pred - meas) / meas);
  }
  return worst;
}

}  // namespace hetsp
