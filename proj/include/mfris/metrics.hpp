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

#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "mfris/channel.hpp"
#include "mfris/design.hpp"
#include "mfris/echo.hpp"
#include "mfris/scenario.hpp"

namespace mfris {

// |g_k^H Theta_d H w_k|^2 / (sum_{i!=k} |.|^2 + sum_n |g_k^H Theta_d H f_n|^2
//                            + s_r^2 ||g_k^H Theta_d||^2 + s_k^2)
double comm_sinr(int k, const ChannelSet& ch, const RisConfiguration& ris, const TransmitDesign& tx,
                 const NoiseLevels& noise);

inline double rate_of(double sinr) { return std::log2(1.0 + sinr); }

// Term-by-term echo SINR of space d.
double sensing_sinr_scalar(Space d, const ChannelSet& ch, const RisConfiguration& ris,
                           const TransmitDesign& tx, const SensingFilters& filters,
                           const NoiseLevels& noise);

// Same quantity as the Rayleigh quotient m^H S m / m^H I m.
double sensing_sinr_matrix(Space d, const ChannelSet& ch, const RisConfiguration& ris,
                           const TransmitDesign& tx, const SensingFilters& filters,
                           const NoiseLevels& noise);

double bs_power(const TransmitDesign& tx);

// Budgets and thresholds a design is audited against.
struct Limits {
  double p_bs = 0.0;
  double p_ris = 0.0;       // ignored when check_ris_power is false
  bool check_ris_power = true;
  double beta_max = 0.0;
  double p_sense = 1.0;
  std::vector<double> min_sinr;  // per user; negative = unconstrained
};

Limits limits_from(const ScenarioConfig& cfg, int n_users);

struct MetricsReport {
  std::vector<double> user_sinr;
  std::vector<double> user_rate;
  std::array<double, 2> sensing_sinr{0.0, 0.0};
  double objective = 0.0;  // sum of the echo SINRs
  double bs_power = 0.0;
  double ris_power = 0.0;
  double worst_violation = 0.0;  // relative
  std::vector<std::string> violations;
  bool feasible() const { return violations.empty(); }
};

MetricsReport evaluate(const ChannelSet& ch, const RisConfiguration& ris, const TransmitDesign& tx,
                       const SensingFilters& filters, const NoiseLevels& noise, const Limits& limits,
                       double tol = 1e-6);

// Radiated power through face d towards direction (phi, varphi):
//   sum_x |b(phi, varphi)^H Theta_d H x|^2.
struct BeamPattern {
  std::vector<double> horizontal_deg;  // from the surface normal
  std::vector<double> vertical_deg;    // above the horizon
  std::array<RMat, 2> gain;            // rows: vertical, cols: horizontal
};

BeamPattern beampattern(const RisConfiguration& ris, const TransmitDesign& tx, const CMat& H,
                        int m_y, int m_z, double spacing, const std::vector<double>& horizontal_deg,
                        const std::vector<double>& vertical_deg);

// CSV face,phi_deg,varphi_deg,gain_db where phi is the vertical angle and
// varphi the horizontal angle from the surface normal.
void write_beampattern_csv(const BeamPattern& bp, std::ostream& os);

// Local maxima of one face sorted by decreasing gain (8-neighbourhood),
// returned as (horizontal_deg, vertical_deg, gain).
struct Peak {
  double horizontal_deg;
  double vertical_deg;
  double gain;
};
std::vector<Peak> beampattern_peaks(const BeamPattern& bp, Space d, int count);

}  // namespace mfris
