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

// Transmit beamforming block: quadratic-transform surrogate of the echo
// SINR sum, first-order inner approximation of the rate constraints, one
// SOCP per iteration.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mfris/conic.hpp"
#include "mfris/design.hpp"
#include "mfris/echo.hpp"
#include "mfris/metrics.hpp"

namespace mfris {

struct SpaceEcho {
  Space d = Space::kReflect;
  EchoModel echo;
  CVec m;  // receive filter (held fixed)
};

struct UserLink {
  CVec a;              // (g_k^H Theta_d H)^H
  double noise = 0.0;  // s_r^2 ||g_k^H Theta_d||^2 + s_k^2
  double min_sinr = 0.0;  // <= 0: unconstrained
};

// Everything the transmit block sees for fixed surface and filters.
struct TxProblem {
  int n_tx = 0;
  int n_users = 0;
  std::vector<SpaceEcho> spaces;  // spaces in the objective
  std::vector<UserLink> users;
  double p_bs = 0.0;
  bool has_ris_power = false;
  CMat Q;                         // H^H (sum_d Theta_d^H Theta_d) H
  double ris_noise_power = 0.0;   // s_r^2 sum_d ||Theta_d||_F^2
  double p_ris = 0.0;
};

TxProblem make_tx_problem(const ChannelSet& ch, const RisConfiguration& ris,
                          const SensingFilters& filters, const NoiseLevels& noise,
                          const Limits& limits, const std::vector<Space>& objective_spaces);

// Sum of the echo SINRs of the problem's spaces.
double tx_objective(const TxProblem& p, const TransmitDesign& tx);
std::vector<double> tx_user_sinr(const TxProblem& p, const TransmitDesign& tx);

// Largest relative violation of the power and rate constraints.
double tx_violation(const TxProblem& p, const TransmitDesign& tx);

struct FpAuxiliaries {
  std::vector<CVec> lambda;  // per space, K
  std::vector<CVec> eta;     // per space, N
  std::vector<double> delta; // per space
};

// sum_x |m^H L x|^2 + m^H Nc m
double compute_delta(const SpaceEcho& s, const TransmitDesign& tx);
FpAuxiliaries update_auxiliaries(const TxProblem& p, const TransmitDesign& tx);

// sum_d [ sum_k 2 Re{conj(lambda) m^H E w_k} + sum_n 2 Re{conj(eta) m^H E f_n}
//         - (sum |lambda|^2 + sum |eta|^2) Delta_d ]
double fp_surrogate(const TxProblem& p, const FpAuxiliaries& aux, const TransmitDesign& tx);

struct TxMatrices {
  std::vector<CMat> P;  // L^H m m^H L per space
  CMat Q;
  std::vector<CMat> T;  // a_k a_k^H per user
};
TxMatrices build_tx_matrices(const TxProblem& p);

struct TxSocp {
  ConicProgram program;
  int n_decision = 0;   // 2 N (K + N)
  double var_scale = 1.0;
  double obj_scale = 1.0;
  double objective_const = 0.0;  // surrogate = -(program objective) / obj_scale
  // Per constrained user: linearised left side and exact quadratic at the
  // expansion point, read back from the assembled rows.
  std::vector<double> qos_linear_at_expansion;
  std::vector<double> qos_quadratic_at_expansion;
};

TxSocp build_tx_socp(const TxProblem& p, const FpAuxiliaries& aux, const TransmitDesign& expansion);
TransmitDesign extract_tx(const TxSocp& socp, const RVec& x, int n_tx, int n_users);

struct ScaOptions {
  int max_iters = 30;
  double tol = 1e-3;
  bool relative_tol = false;  // |change| <= tol, or <= tol |objective|
  SolverOptions solver;

  bool converged(double before, double after) const {
    const double scale = relative_tol ? std::max(std::abs(after), 1e-300) : 1.0;
    return std::abs(after - before) <= tol * scale;
  }
};

struct ScaStep {
  int iter = 0;
  double objective = 0.0;   // true objective after the step
  double surrogate = 0.0;   // SOCP optimum in surrogate units
  double tangency_gap = 0.0;  // max |linearised - quadratic| / quadratic at the expansion point
  bool accepted = false;
  SolveStatus status = SolveStatus::kOptimal;
  int solver_iterations = 0;
  double wall_ms = 0.0;
};

struct TxResult {
  TransmitDesign tx;
  double objective = 0.0;
  std::vector<ScaStep> steps;
  bool converged = false;
  int failures = 0;
  std::string note;
};

TxResult solve_tx(const TxProblem& p, const TransmitDesign& start, const ScaOptions& opts);

// Minimum-power communication beams with the sensing beams F held fixed.
// Returns nothing when the rate constraints cannot be met.
std::optional<CMat> min_power_beams(const TxProblem& p, const CMat& F, const SolverOptions& opts);

// Beam step of the feasibility phase: the smallest common scale t of the
// power budgets (t p_bs, t p_ris) for which rate-feasible beams exist, with
// no sensing beams.
struct ScaledBeams {
  CMat W;
  double scale = 0.0;
};
std::optional<ScaledBeams> budget_scaled_beams(const TxProblem& p, const SolverOptions& opts);

// Feasible starting design: sensing beams along the dominant echo
// directions at decreasing power until the minimum-power communication
// beams exist. Throws InfeasibleError when even F = 0 fails.
TransmitDesign initial_tx(const TxProblem& p, const SolverOptions& opts);

}  // namespace mfris
