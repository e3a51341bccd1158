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

// Comparison schemes: random surface, grid search over the surface,
// semidefinite relaxation, and the conventional STAR / active / passive
// surfaces.

#pragma once

#include <stdexcept>

#include "mfris/ao.hpp"

namespace mfris {

class BackendUnavailableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Energy-splitting surface with random feasible coefficients; filters and
// beams are still optimised. Draws until a rate-feasible configuration
// turns up (at most max_draws), then falls back to repairing the last draw.
SolutionRecord random_baseline(const ChannelSet& ch, const ScenarioConfig& cfg, const AoOptions& opts,
                               int max_draws = 20);

struct ExhaustiveOptions {
  int phase_steps = 8;
  int amp_steps = 8;
  // Candidates kept after screening; each gets the full filter/beam loop.
  int refine = 16;
  int refine_ao_iters = 10;
  double grid_limit = 1e8;
};

struct ExhaustiveStats {
  double grid_size = 0.0;        // (phase_steps * amp_steps)^(2M)
  long long enumerated = 0;      // grid points visited
  long long candidates = 0;      // distinct and within the amplitude budget
  long long rate_possible = 0;   // pass the single-user rate bound
  int refined = 0;
  int refined_feasible = 0;
};

// Energy-splitting grid search. Amplitudes take amp_steps evenly spaced
// values in [0, sqrt(beta_max)], phases phase_steps values in [0, 2 pi).
// Every candidate is screened by the best single-beam echo SINR (filter
// and beam alternated without rate constraints); the best refine
// candidates are then scored with optimised filters and beams under all
// constraints. Faces with no user and no target stay off. Throws
// ConfigError when the grid exceeds grid_limit.
SolutionRecord exhaustive_baseline(const ChannelSet& ch, const ScenarioConfig& cfg, const AoOptions& opts,
                                   const ExhaustiveOptions& ex = {}, ExhaustiveStats* stats = nullptr);

// Semidefinite relaxation with Gaussian randomisation. The built-in conic
// kernel has no semidefinite cone, so this always throws
// BackendUnavailableError.
SolutionRecord sdr_baseline(const ChannelSet& ch, const ScenarioConfig& cfg, const AoOptions& opts);

// STAR, ACTIVE or PASSIVE surface. ch must be built for that protocol
// (2M elements for the split surfaces).
SolutionRecord fixed_architecture_baseline(Protocol kind, const ChannelSet& ch, const ScenarioConfig& cfg,
                                           const AoOptions& opts);

}  // namespace mfris
