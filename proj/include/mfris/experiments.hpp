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

// Experiment harness behind the command-line tool: scenario construction
// with common random numbers, the scheme registry, sweeps, convergence
// traces and beampatterns.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mfris/ao.hpp"
#include "mfris/channel.hpp"
#include "mfris/metrics.hpp"
#include "mfris/scenario.hpp"

namespace mfris {

struct Scenario {
  ScenarioConfig cfg;
  Geometry geom;
  ChannelSet ch;
};

// Geometry from stream 1 and channels from stream 2 of cfg.seed. Only the
// protocol's element count depends on cfg.protocol, so every scheme at the
// same seed sees the same users, targets and fading.
Scenario make_scenario(const ScenarioConfig& cfg);

// ES MS TS STAR ACTIVE PASSIVE RANDOM EXHAUSTIVE SDR
const std::vector<std::string>& scheme_names();
// Upper-cases and checks the name; throws ConfigError for unknown schemes.
std::string canonical_scheme(const std::string& name);
// Surface protocol a scheme runs on (RANDOM/EXHAUSTIVE/SDR use ES).
Protocol scheme_protocol(const std::string& scheme);

// One run of the scheme at cfg (cfg.protocol is overridden).
SolutionRecord run_scheme(const std::string& scheme, const ScenarioConfig& cfg);

// --- sweeps ---------------------------------------------------------------

// M, Ms, P_total or R_th (case-insensitive; M_s and P accepted).
std::string canonical_axis(const std::string& axis);
// Default grid of an axis.
std::vector<double> default_axis_values(const std::string& axis);
// cfg with the axis set to value. M maps to m_y = M / 4 (m_z = 4); Ms maps
// to m_v = m_h = Ms / 2. Throws ConfigError for values off that lattice.
ScenarioConfig apply_axis(const ScenarioConfig& cfg, const std::string& axis, double value);

struct SweepCell {
  std::string scheme;
  std::string axis;
  double value = 0.0;
  std::uint64_t seed = 0;
  double objective = 0.0;  // NaN when the cell failed
  double objective_db = 0.0;
  double rate_min = 0.0;
  bool feasible = false;
  std::string error;
};

// Runs every (scheme, value, seed) on jobs worker threads. Cells come back
// sorted by scheme order, value, seed.
std::vector<SweepCell> run_sweep(const ScenarioConfig& base, const std::string& axis,
                                 const std::vector<double>& values, const std::vector<std::uint64_t>& seeds,
                                 const std::vector<std::string>& schemes, int jobs);

struct SweepSummary {
  std::string scheme;
  double value = 0.0;
  int count = 0;  // finite cells
  double mean_db = 0.0;
  double std_db = 0.0;
  double mean_rate_min = 0.0;
  double feasible_fraction = 0.0;
};

// Per (scheme, value) statistics of the per-seed dB values over the
// finite cells.
std::vector<SweepSummary> summarize(const std::vector<SweepCell>& cells);

// scheme,axis,value,seed,objective_db,rate_min,feasible
// followed by one "mean" and one "std" row per (scheme, value); those rows
// carry the statistic in the seed column, the mean/std of objective_db and
// rate_min, and the feasible fraction.
void write_sweep_csv(const std::vector<SweepCell>& cells, std::ostream& os);

// --- convergence ----------------------------------------------------------

struct Dims {
  int n_tx = 8;
  int m = 32;
  int m_s = 8;
};
Dims parse_dims(const std::string& text);  // "8x32x8"
ScenarioConfig apply_dims(const ScenarioConfig& cfg, const Dims& d);

struct ConvergenceRun {
  Dims dims;
  std::uint64_t seed = 0;
  SolutionRecord rec;
};

std::vector<ConvergenceRun> run_convergence(const ScenarioConfig& base, const std::vector<Dims>& dims,
                                            const std::vector<std::uint64_t>& seeds, int jobs);

// n_tx,m,m_s,seed,iter,objective,objective_db (iter 0 is the start point)
void write_convergence_csv(const std::vector<ConvergenceRun>& runs, std::ostream& os);

// --- beampattern ----------------------------------------------------------

// Targets of the beampattern figure: (60, 10) and (-60, 70) degrees in r,
// (60, 20) and (-60, 30) in t, 20 m from the surface.
ScenarioConfig four_target_config(const ScenarioConfig& cfg);

struct AngleGrid {
  double h_min = -90.0, h_max = 90.0, h_step = 1.0;
  double v_min = -90.0, v_max = 90.0, v_step = 1.0;
  std::vector<double> horizontal() const;
  std::vector<double> vertical() const;
};

BeamPattern solution_beampattern(const Scenario& sc, const SolutionRecord& rec, const AngleGrid& grid);

// Configured (horizontal, vertical) target angles of a face, in degrees.
std::vector<std::array<double, 2>> target_angles(const ScenarioConfig& cfg, Space d);

// Grid distance max(|dh|, |dv|) from a peak to the nearest configured target.
double nearest_target_deg(const Peak& p, const std::vector<std::array<double, 2>>& targets);

// Runs fn(i) for i in [0, n) on up to jobs threads.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace mfris
