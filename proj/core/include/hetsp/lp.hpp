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

#ifndef HETSP_LP_HPP_
#define HETSP_LP_HPP_

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace hetsp::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense { kLessEqual, kGreaterEqual, kEqual };

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Row {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::kLessEqual;
  double rhs = 0.0;
};

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInfinity;
  double cost = 0.0;
  bool integer = false;
};

// min cost^T x  s.t. rows, lower <= x <= upper.
struct Model {
  std::vector<Variable> vars;
  std::vector<Row> rows;

  int add_var(Variable v);
  void add_row(Row r);
  // One line per row, e.g. "time[p3]: 1.5*A[q0,p3] + 0.2*m[p3] - 1*C <= 0".
  std::vector<std::string> describe_rows() const;
};

enum class LpStatus { kOptimal, kInfeasible, kIterationLimit };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  double objective = 0.0;
  std::vector<double> x;  // structural values
  int iterations = 0;
};

// Dense-tableau dual simplex over bounded variables. The all-slack starting
// basis is dual feasible because every cost is non-negative and every
// structural lower bound is finite; the model constructor checks both.
// After a solve the object keeps its final basis, so copying it and calling
// solve() again with tighter bounds is a warm start.
class DualSimplex {
 public:
  explicit DualSimplex(const Model& model);

  // Bounds for the structural variables; sizes must equal the model's.
  LpResult solve(std::span<const double> lower, std::span<const double> upper);

  int rows() const { return rows_; }
  int structurals() const { return structurals_; }

 private:
  void pivot(int row, int col);
  void recompute_basic_values();
  int choose_leaving(bool bland) const;
  int choose_entering(int row, bool increase, bool bland) const;

  int rows_ = 0;
  int structurals_ = 0;
  int cols_ = 0;
  std::vector<double> tableau_;   // rows_ x cols_, B^-1 [A I]
  std::vector<double> rhs_;       // B^-1 b
  std::vector<double> reduced_;   // c - c_B B^-1 [A I]
  std::vector<double> cost_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> value_;     // all columns
  std::vector<int> basis_;        // column basic in each row
  std::vector<int> basic_row_;    // row of each column, -1 if nonbasic
  std::vector<int> nonzero_;      // scratch for pivot()
};

}  // namespace hetsp::lp

#endif  // HETSP_LP_HPP_
