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

// Outer alternating optimisation: filters, then transmit beams, then
// surface coefficients, each block scored with the true objective.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mfris/channel.hpp"
#include "mfris/design.hpp"
#include "mfris/metrics.hpp"
#include "mfris/ris_opt.hpp"
#include "mfris/tx_opt.hpp"

namespace mfris {

struct AoOptions {
  ScaOptions tx_sca;
  ScaOptions ris_sca;
  double tol = 1e-3;  // change of the outer objective
  bool relative_tol = true;
  int max_iters = 50;
  int restarts = 1;
  bool optimize_ris = true;
  bool feasibility_phase = true;  // repair a rate-infeasible start
  AmplitudeForm amplitude_form = AmplitudeForm::kPower;
  double audit_tol = 1e-8;  // allowed relative decrease between blocks
  double ts_tau_tol = 0.02;
  std::uint64_t seed = 1;  // restart phases
};

AoOptions ao_options_from(const ScenarioConfig& cfg);

struct BlockTrace {
  int iter = 0;        // 0 = initial point
  std::string block;   // init | filter | tx | ris
  double objective = 0.0;
  bool feasible = true;
  double wall_ms = 0.0;
  int sca_iters = 0;
  double tangency_gap = 0.0;  // worst over the block's SCA steps
};

struct SolutionRecord {
  std::string scheme;
  Protocol protocol = Protocol::kES;
  TransmitDesign tx;
  RisConfiguration ris;
  SensingFilters filters;
  MetricsReport report;
  double objective = 0.0;           // sum of echo SINRs (TS: time-weighted)
  std::vector<double> outer_objective;  // after every outer iteration
  std::vector<BlockTrace> trace;
  bool converged = false;
  int iterations = 0;
  bool monotone = true;
  double worst_drop = 0.0;  // largest relative decrease between blocks
  double max_tangency_gap = 0.0;
  std::vector<double> user_rates;
  bool feasible = false;
  std::vector<std::string> notes;
  // TS only: one record per phase (r then t) with its own design.
  std::vector<SolutionRecord> phases;
  double filter_ms = 0.0, tx_ms = 0.0, ris_ms = 0.0;
};

enum class Steering {
  kTarget,        // strongest target of the face's space
  kMixed,         // superposition of that target and every user of the space
  kWeakestUser,   // user of the space with the weakest cascaded channel
};

// Co-phased starting coefficients for the protocol: every active element
// steers the dominant base-station beam towards the chosen receiver of its
// face's space.
RisConfiguration initial_ris(const ChannelSet& ch, Protocol protocol, double beta_max,
                             const std::vector<int>& mode_mask = {},
                             Steering steering = Steering::kTarget);

// Starting points in the order they are tried: the three steered starts,
// then n_random random-phase copies of the target-steered one.
std::vector<RisConfiguration> start_candidates(const ChannelSet& ch, Protocol protocol, double beta_max,
                                               const std::vector<int>& mode_mask, int n_random,
                                               std::uint64_t seed);

// Feasibility phase: alternates budget-scaled minimum-power beams with a
// surface step maximising the common rate margin, until rate-feasible beams
// fit inside the power budgets. Throws InfeasibleError when it stalls.
inline constexpr int kFeasibilityRounds = 20;
RisConfiguration restore_feasibility(const ChannelSet& ch, const RisConfiguration& start,
                                     const NoiseLevels& noise, const Limits& limits,
                                     const std::vector<Space>& spaces, const AoOptions& opts,
                                     int* rounds = nullptr);

// Single AO run from a given surface configuration over the given spaces.
// Rate thresholds come from limits.min_sinr.
SolutionRecord ao_from(const ChannelSet& ch, const RisConfiguration& start, const NoiseLevels& noise,
                       const Limits& limits, const std::vector<Space>& spaces, const AoOptions& opts);

// Protocol dispatch (MS rounding, TS time split) with restarts.
SolutionRecord alternating_optimize(const ChannelSet& ch, const ScenarioConfig& cfg,
                                    const AoOptions& opts);

// Element-wise dominant face of an ES configuration (0 = r, 1 = t).
std::vector<int> dominant_face_mask(const RisConfiguration& ris);

// Mode-switching element assignment from an ES configuration: the refraction
// face receives a share of the elements equal to its share of the
// amplification energy, clamped so that a face serving a user or target
// keeps at least min_count elements; the elements with the largest
// refraction fraction go to it.
std::vector<int> mode_switch_mask(const ChannelSet& ch, const RisConfiguration& es, int min_count);

// Moves each element's whole ES gain onto its assigned face.
RisConfiguration round_to_mask(const RisConfiguration& es, const std::vector<int>& mask);

// Per-iteration complexity expressions instantiated for cfg, with measured
// block times of rec when given.
std::string complexity_report(const ScenarioConfig& cfg, const SolutionRecord* rec = nullptr);

// iter,block,objective,feasible,wall_ms. wall_ms is written as 0 unless
// timing is set, so repeated runs give identical files.
void write_trace_csv(const SolutionRecord& rec, std::ostream& os, bool timing = false);

}  // namespace mfris
