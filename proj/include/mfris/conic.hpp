// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Real second-order cone programming kernel.
//
//   minimize    c'x + c0
//   subject to  E x = f
//               A_i x + b_i  in  K_i      (nonneg, Lorentz or rotated Lorentz)
//
// Lorentz cone:  { (t, u) : t >= ||u|| }.
// Rotated cone:  { (u, v, w) : 2 u v >= ||w||^2, u >= 0, v >= 0 }.
//
// Programs are assembled row by row through ConicBuilder; each cone block
// keeps only the columns it touches so the normal-equation assembly in the
// interior-point method scales with the block sparsity of the problem.

#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mfris/types.hpp"

namespace mfris {

enum class ConeKind { kNonneg, kSoc, kRotatedSoc };

// One row of an affine map: sum_j coef_j * x[var_j] + constant.
struct AffineRow {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  AffineRow& add(int var, double coef) {
    if (coef != 0.0) terms.emplace_back(var, coef);
    return *this;
  }
};

struct ConeBlock {
  ConeKind kind = ConeKind::kNonneg;
  std::vector<AffineRow> rows;
  std::string label;
};

struct ConicProgram {
  int n_vars = 0;
  RVec objective;  // minimized
  double objective_offset = 0.0;
  std::vector<AffineRow> equalities;  // each row == 0
  std::vector<ConeBlock> cones;

  int cone_rows() const;
  // Largest violation of any equality or cone membership at x.
  double max_violation(const RVec& x) const;
  double evaluate_objective(const RVec& x) const;
  void validate() const;
};

// Plain-text dump: variables, objective, equality rows and cone blocks.
void dump_program(const ConicProgram& p, std::ostream& os);

class ConicBuilder {
 public:
  int add_variables(int count);
  int n_vars() const { return program_.n_vars; }

  void set_objective(int var, double coef);
  void add_objective(int var, double coef);
  void add_objective_offset(double c) { program_.objective_offset += c; }

  void add_equality(AffineRow row);
  void add_nonneg(AffineRow row, std::string label = {});
  void add_soc(std::vector<AffineRow> rows, std::string label = {});
  void add_rotated_soc(std::vector<AffineRow> rows, std::string label = {});

  // ||factor * x[vars]||^2 <= bound(x), as a rotated cone with v = 1/2.
  void add_quadratic_le(const RMat& factor, const std::vector<int>& vars, AffineRow bound,
                        std::string label = {});

  ConicProgram build() &&;
  const ConicProgram& program() const { return program_; }

 private:
  ConicProgram program_;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kMaxIter, kNumericalError };

std::string to_string(SolveStatus s);

struct SolverOptions {
  double feas_tol = 1e-9;
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  int max_iter = 80;
};

struct ConicSolution {
  SolveStatus status = SolveStatus::kNumericalError;
  RVec x;
  double objective = 0.0;
  double dual_objective = 0.0;
  double max_violation = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
};

// Optimal, or stopped at the iteration cap / accuracy floor with a primal
// point that meets every constraint to max_violation.
inline bool usable(const ConicSolution& s, double max_violation = 1e-7) {
  return s.status == SolveStatus::kOptimal ||
         (s.status == SolveStatus::kMaxIter && s.max_violation <= max_violation);
}

// Homogeneous self-dual primal-dual interior-point method with
// Nesterov-Todd scaling and Mehrotra predictor-corrector steps.
ConicSolution solve(const ConicProgram& p, const SolverOptions& opts = {});

// Real factor R (r x 2n) with ||R [Re x; Im x]||^2 = x^H Q x for Hermitian
// positive semidefinite Q. Eigenvalues below zero (down to -1e-9 ||Q||) are
// clipped; larger negative eigenvalues or asymmetry above 1e-8 ||Q|| throw.
RMat lift_complex_quadratic(const CMat& Q);

// Real rows of a complex linear map: for complex L (r x n), returns the
// 2r x 2n matrix mapping [Re x; Im x] to [Re(Lx); Im(Lx)].
RMat lift_complex_linear(const CMat& L);

}  // namespace mfris
