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

// Surface coefficient block. The matrices below use the conjugate
// coefficient vector theta_d = conj(diag(Theta_d)), so that the echo of beam
// x reads theta_d^H diag(m^H G_d) H x. Internally the SOCP works on the
// physical coefficients.
//
// Surfaces that sense on their own elements have echoes linear in the
// coefficients and every SCA step is an inner approximation. The four-hop
// surfaces (STAR, split active, split passive) have echoes quadratic in the
// coefficients; their step linearises the echo holomorphically, projects
// onto the nonconvex amplitude set where needed and backtracks on the true
// objective.

#pragma once

#include <array>
#include <optional>
#include <vector>

#include "mfris/tx_opt.hpp"

namespace mfris {

enum class AmplitudeForm {
  kPower,       // |theta_r|^2 + |theta_t|^2 <= beta_max (exact)
  kModulusSum,  // |theta_r| + |theta_t| <= sqrt(beta_max) (conservative)
};

struct RisProblem {
  const ChannelSet* ch = nullptr;
  TransmitDesign tx;
  SensingFilters filters;
  NoiseLevels noise;
  Limits limits;
  std::vector<Space> spaces;  // spaces in the objective
  Protocol protocol = Protocol::kES;
  // Per face, per element: 1 when the coefficient may be nonzero.
  std::array<std::vector<char>, 2> allowed;
  AmplitudeForm form = AmplitudeForm::kPower;
  std::vector<int> mode_mask;  // copied onto every emitted configuration
  double tau_r = 1.0, tau_t = 0.0;
};

// All faces allowed, or restricted by an element mask (MS, split surfaces)
// or to a single face (TS phases).
RisProblem make_ris_problem(const ChannelSet& ch, const RisConfiguration& start,
                            const TransmitDesign& tx, const SensingFilters& filters,
                            const NoiseLevels& noise, const Limits& limits,
                            const std::vector<Space>& spaces);

struct RisMatrices {
  std::array<CVec, 2> t;     // diag(m^H G_d) H (sum conj(lambda) w + sum conj(eta) f)
  std::array<CMat, 2> Gm;    // diag(m^H G_d) diag(G_d^H m)
  std::vector<CMat> S;       // s_k s_k^H, s_k = diag(g_k^H) H w_k
  std::vector<CMat> Sbar;    // interference + amplified noise of user k
  CMat U;                    // diag(sum_x |H x|^2 + sigma_r^2)
};

// Surfaces that sense on their own elements only.
RisMatrices build_ris_matrices(const RisProblem& p, const FpAuxiliaries& aux);

double ris_objective(const RisProblem& p, const RisConfiguration& ris);
// Worst relative violation of the power and rate constraints; amplitude
// rules are checked separately through validate().
double ris_violation(const RisProblem& p, const RisConfiguration& ris);
bool ris_feasible(const RisProblem& p, const RisConfiguration& ris, double tol = 1e-7);

struct RisSocp {
  ConicProgram program;
  int n_coeff = 0;  // 4 M
  int n_aux = 0;    // 2 M amplitude auxiliaries (sensing surfaces) or 0
  double obj_scale = 1.0;
  std::vector<double> qos_linear_at_expansion;
  std::vector<double> qos_quadratic_at_expansion;
};

RisSocp build_ris_socp(const RisProblem& p, const FpAuxiliaries& aux, const RisConfiguration& expansion);
RisConfiguration extract_ris(const RisProblem& p, const RisSocp& socp, const RVec& x);

// Nearest point of the nonconvex amplitude set (STAR: unit power sum per
// element; PASSIVE: unit modulus). Identity for the other protocols.
RisConfiguration project_amplitudes(const RisProblem& p, const RisConfiguration& ris);

// Surface step of the feasibility phase: maximise the common normalised
// rate margin s (capped at kMarginCap) over the linearised rate constraints
// with the beams held fixed. s >= 0 means every linearised constraint holds.
inline constexpr double kMarginCap = 0.05;
struct MarginStep {
  RisConfiguration ris;
  double margin = 0.0;
};
std::optional<MarginStep> qos_margin_step(const RisProblem& p, const RisConfiguration& expansion,
                                          const SolverOptions& opts);

struct RisResult {
  RisConfiguration ris;
  double objective = 0.0;
  std::vector<ScaStep> steps;
  bool converged = false;
  int failures = 0;
  std::string note;
};

RisResult solve_ris(const RisProblem& p, const RisConfiguration& start, const ScaOptions& opts);

}  // namespace mfris
