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

#include "mfris/rng.hpp"
#include "mfris/scenario.hpp"
#include "mfris/types.hpp"

namespace mfris {

// u(theta, n)_i = exp(-j 2 pi i theta), i = 0..n-1
CVec steering_vector(double theta_tilde, int n);

// Planar surface response: u(s sin(phi), m_z) kron u(s cos(phi) cos(varphi), m_y).
CVec ris_steering(double phi, double varphi, int m_y, int m_z, double spacing);

// Sensing-element response: vertical block over horizontal block.
CVec sensor_steering(double phi, double varphi, int m_v, int m_h, double spacing);

// Line-of-sight BS -> surface matrix b(phi, varphi) u^T(s cos(phi) cos(varphi), N).
CMat bs_los(double phi, double varphi, int m_y, int m_z, int n_tx, double spacing);

// sqrt(L) (sqrt(k/(1+k)) los + sqrt(1/(1+k)) CN(0, 1)); kappa >= 1e12 is
// treated as pure line of sight and draws nothing.
CMat rician_channel(const CMat& los, double path_gain, double kappa, Rng& rng);

struct TargetResponse {
  CMat G;      // Ms x M
  CMat A;      // Ms x J_d
  CMat B;      // M x J_d
  CVec alpha;  // J_d
};

TargetResponse target_response(const std::vector<Node>& targets, const ScenarioConfig& cfg,
                               int m_y, int m_z, Rng& rng);

struct ChannelSet {
  int n_tx = 0;
  int m_elems = 0;
  int m_sense = 0;
  CMat H;                        // M x N
  std::vector<CVec> g;           // per user, M
  std::vector<Space> user_space;
  std::array<CMat, 2> Hd;        // Ms x N per space
  std::array<TargetResponse, 2> targets;

  const CMat& G(Space d) const { return targets[index_of(d)].G; }
  std::vector<int> users_in(Space d) const;
  int n_users() const { return static_cast<int>(g.size()); }
};

// Draws the channels for a surface of 2M elements (m_z doubled) and keeps
// the first M rows unless the protocol uses the split two-group surface.
// Every protocol therefore sees the same realisation on shared elements.
ChannelSet build_channels(const Geometry& geom, const ScenarioConfig& cfg, Rng& rng);

// Surface element count a protocol operates on.
int surface_elements(const ScenarioConfig& cfg);

// Text dump: "block <name> <rows> <cols>" headers followed by one line per
// row holding comma-separated re,im pairs.
void write_channels(const ChannelSet& ch, std::ostream& os);
ChannelSet read_channels(std::istream& is);

}  // namespace mfris
