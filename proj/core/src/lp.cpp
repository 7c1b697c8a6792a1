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

#include "hetsp/lp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hetsp::lp {

namespace {

constexpr double kPrimalTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kDualTol = 1e-12;
constexpr int kRefreshEvery = 64;

double bound_tol(double bound) { return kPrimalTol * std::max(1.0, std::abs(bound)); }

}  // namespace

int Model::add_var(Variable v) {
  vars.push_back(std::move(v));
  return static_cast<int>(vars.size()) - 1;
}

void Model::add_row(Row r) { rows.push_back(std::move(r)); }

std::vector<std::string> Model::describe_rows() const {
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const Row& row : rows) {
    std::ostringstream os;
    os.precision(12);
    os << row.name << ":";
    bool first = true;
    for (const Term& t : row.terms) {
      if (first) {
        os << " " << t.coef;
      } else {
        os << (t.coef < 0 ? " - " : " + ") << std::abs(t.coef);
      }
      os << "*" << vars[t.var].name;
      first = false;
    }
    if (first) os << " 0";
    switch (row.sense) {
      case Sense::kLessEqual: os << " <= "; break;
      case Sense::kGreaterEqual: os << " >= "; break;
      case Sense::kEqual: os << " = "; break;
    }
    os << row.rhs;
    out.push_back(os.str());
  }
  return out;
}

DualSimplex::DualSimplex(const Model& model)
    : rows_(static_cast<int>(model.rows.size())),
      structurals_(static_cast<int>(model.vars.size())),
      cols_(structurals_ + rows_) {
  tableau_.assign(static_cast<std::size_t>(rows_) * cols_, 0.0);
  rhs_.assign(rows_, 0.0);
  cost_.assign(cols_, 0.0);
  lower_.assign(cols_, 0.0);
  upper_.assign(cols_, kInfinity);
  value_.assign(cols_, 0.0);
  basis_.resize(rows_);
  basic_row_.assign(cols_, -1);

  for (int j = 0; j < structurals_; ++j) {
    const Variable& v = model.vars[j];
    if (v.cost < 0) throw std::invalid_argument("lp: negative cost on " + v.name);
    if (!std::isfinite(v.lower)) throw std::invalid_argument("lp: infinite lower bound on " + v.name);
    cost_[j] = v.cost;
    lower_[j] = v.lower;
    upper_[j] = v.upper;
  }
  // Row i: a x + s_i = b with s_i >= 0 (<=), s_i <= 0 (>=), s_i = 0 (=).
  for (int i = 0; i < rows_; ++i) {
    const Row& row = model.rows[i];
    double* t = &tableau_[static_cast<std::size_t>(i) * cols_];
    for (const Term& term : row.terms) t[term.var] += term.coef;
    const int slack = structurals_ + i;
    t[slack] = 1.0;
    rhs_[i] = row.rhs;
    switch (row.sense) {
      case Sense::kLessEqual: lower_[slack] = 0.0; upper_[slack] = kInfinity; break;
      case Sense::kGreaterEqual: lower_[slack] = -kInfinity; upper_[slack] = 0.0; break;
      case Sense::kEqual: lower_[slack] = 0.0; upper_[slack] = 0.0; break;
    }
    basis_[i] = slack;
    basic_row_[slack] = i;
  }
  reduced_ = cost_;
}

void DualSimplex::recompute_basic_values() {
  for (int i = 0; i < rows_; ++i) {
    const double* t = &tableau_[static_cast<std::size_t>(i) * cols_];
    double v = rhs_[i];
    for (int j = 0; j < cols_; ++j) {
      if (basic_row_[j] < 0 && value_[j] != 0.0 && t[j] != 0.0) v -= t[j] * value_[j];
    }
    value_[basis_[i]] = v;
  }
}

void DualSimplex::pivot(int row, int col) {
  double* pr = &tableau_[static_cast<std::size_t>(row) * cols_];
  const double inv = 1.0 / pr[col];
  // The pivot row is often sparse; update only its nonzero columns.
  nonzero_.clear();
  for (int j = 0; j < cols_; ++j) {
    if (pr[j] != 0.0) {
      pr[j] *= inv;
      nonzero_.push_back(j);
    }
  }
  rhs_[row] *= inv;
  pr[col] = 1.0;
  for (int i = 0; i < rows_; ++i) {
    if (i == row) continue;
    double* ti = &tableau_[static_cast<std::size_t>(i) * cols_];
    const double f = ti[col];
    if (f == 0.0) continue;
    for (int j : nonzero_) ti[j] -= f * pr[j];
    ti[col] = 0.0;
    rhs_[i] -= f * rhs_[row];
  }
  const double fd = reduced_[col];
  if (fd != 0.0) {
    for (int j : nonzero_) reduced_[j] -= fd * pr[j];
  }
  reduced_[col] = 0.0;
  const int leaving = basis_[row];
  basic_row_[leaving] = -1;
  basis_[row] = col;
  basic_row_[col] = row;
}

int DualSimplex::choose_leaving(bool bland) const {
  int best = -1;
  double best_violation = 0.0;
  for (int i = 0; i < rows_; ++i) {
    const int b = basis_[i];
    const double x = value_[b];
    double violation = 0.0;
    if (x < lower_[b] - bound_tol(lower_[b])) violation = lower_[b] - x;
    else if (x > upper_[b] + bound_tol(upper_[b])) violation = x - upper_[b];
    if (violation <= 0.0) continue;
    if (bland) {
      if (best < 0 || b < basis_[best]) best = i;
    } else if (violation > best_violation) {
      best = i;
      best_violation = violation;
    }
  }
  return best;
}

int DualSimplex::choose_entering(int row, bool increase, bool bland) const {
  const double* pr = &tableau_[static_cast<std::size_t>(row) * cols_];
  int best = -1;
  double best_ratio = kInfinity;
  double best_alpha = 0.0;
  for (int j = 0; j < cols_; ++j) {
    if (basic_row_[j] >= 0) continue;
    if (lower_[j] == upper_[j]) continue;
    const double alpha = pr[j];
    if (std::abs(alpha) < kPivotTol) continue;
    const bool at_upper = value_[j] == upper_[j] && value_[j] != lower_[j];
    // x_row moves by -alpha * dx_j.
    bool eligible;
    if (increase) eligible = at_upper ? alpha > 0 : alpha < 0;
    else eligible = at_upper ? alpha < 0 : alpha > 0;
    if (!eligible) continue;
    const double ratio = std::abs(reduced_[j]) / std::abs(alpha);
    if (bland) {
      if (ratio < best_ratio - kDualTol) {
        best = j;
        best_ratio = ratio;
      }
      continue;
    }
    if (ratio < best_ratio - kDualTol ||
        (ratio <= best_ratio + kDualTol && std::abs(alpha) > best_alpha)) {
      best = j;
      best_ratio = std::min(ratio, best_ratio);
      best_alpha = std::abs(alpha);
    }
  }
  return best;
}

LpResult DualSimplex::solve(std::span<const double> lower, std::span<const double> upper) {
  if (static_cast<int>(lower.size()) != structurals_ ||
      static_cast<int>(upper.size()) != structurals_) {
    throw std::invalid_argument("lp: bound vector size mismatch");
  }
  LpResult result;
  for (int j = 0; j < structurals_; ++j) {
    lower_[j] = lower[j];
    upper_[j] = upper[j];
    if (lower_[j] > upper_[j] + bound_tol(upper_[j])) return result;  // empty box
  }
  // Nonbasic columns sit at the bound their reduced cost makes dual feasible.
  for (int j = 0; j < cols_; ++j) {
    if (basic_row_[j] >= 0) continue;
    if (reduced_[j] < -kDualTol && std::isfinite(upper_[j])) {
      value_[j] = upper_[j];
    } else if (std::isfinite(lower_[j])) {
      value_[j] = lower_[j];
    } else {
      value_[j] = upper_[j];
    }
  }
  recompute_basic_values();

  const int iteration_cap = 50 * (rows_ + cols_) + 1000;
  const int bland_after = 10 * (rows_ + cols_) + 100;
  for (int iter = 0;; ++iter) {
    if (iter >= iteration_cap) {
      result.status = LpStatus::kIterationLimit;
      result.iterations = iter;
      return result;
    }
    if (iter > 0 && iter % kRefreshEvery == 0) recompute_basic_values();
    const bool bland = iter >= bland_after;
    const int row = choose_leaving(bland);
    if (row < 0) {
      result.iterations = iter;
      break;
    }
    const int leaving = basis_[row];
    const bool increase = value_[leaving] < lower_[leaving];
    const double target = increase ? lower_[leaving] : upper_[leaving];
    const int col = choose_entering(row, increase, bland);
    if (col < 0) {
      result.status = LpStatus::kInfeasible;
      result.iterations = iter;
      return result;
    }
    const double alpha = tableau_[static_cast<std::size_t>(row) * cols_ + col];
    const double delta = (value_[leaving] - target) / alpha;
    for (int i = 0; i < rows_; ++i) {
      if (i == row) continue;
      const double t = tableau_[static_cast<std::size_t>(i) * cols_ + col];
      if (t != 0.0) value_[basis_[i]] -= t * delta;
    }
    value_[col] += delta;
    value_[leaving] = target;
    pivot(row, col);
  }

  result.status = LpStatus::kOptimal;
  result.x.assign(value_.begin(), value_.begin() + structurals_);
  for (int j = 0; j < structurals_; ++j) {
    // Snap tiny drift onto bounds.
    if (std::abs(result.x[j] - lower_[j]) <= bound_tol(lower_[j])) result.x[j] = lower_[j];
    if (std::isfinite(upper_[j]) && std::abs(result.x[j] - upper_[j]) <= bound_tol(upper_[j])) {
      result.x[j] = upper_[j];
    }
    result.objective += cost_[j] * result.x[j];
  }
  return result;
}

}  // namespace hetsp::lp
