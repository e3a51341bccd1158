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

// Echo path seen by the receive filter of one space.
//
// For a filter m and transmit beams x (columns of [W F]):
//   signal  = sum_x |m^H E x|^2
//   leakage = sum_x |m^H L x|^2
//   noise   = m^H Nc m
//   SINR    = signal / (leakage + noise)
//
// Surfaces with sensing elements (ES/MS/TS):
//   E = G_d Theta_d H, L = H_d, Nc = s_r^2 G_d Theta_d Theta_d^H G_d^H + s_s^2 I.
// Conventional surfaces return the echo to the BS over the reciprocal link:
//   E = H^T Theta_d conj(B) diag(alpha) B^H Theta_d H, L = 0,
//   Nc = s_r^2 H^T Theta_d Theta_d^H conj(H) + s_s^2 I  (s_r = 0 without amplifiers).

#pragma once

#include "mfris/channel.hpp"
#include "mfris/design.hpp"
#include "mfris/scenario.hpp"

namespace mfris {

struct NoiseLevels {
  double user2 = 0.0;   // sigma_k^2
  double ris2 = 0.0;    // sigma_r^2 (zero for surfaces without amplifiers)
  double sense2 = 0.0;  // sigma_s^2
};

NoiseLevels noise_levels(const ScenarioConfig& cfg);

struct EchoModel {
  CMat E;
  CMat L;
  CMat Nc;
  int receive_dim() const { return static_cast<int>(E.rows()); }
};

EchoModel echo_model(Space d, const ChannelSet& ch, const RisConfiguration& ris,
                     const NoiseLevels& noise);

// conj(B) diag(alpha) B^H for the targets of space d (M x M).
CMat round_trip_response(const ChannelSet& ch, Space d);

struct QuotientMatrices {
  CMat signal;       // E R E^H
  CMat interference; // L R L^H + Nc
};

QuotientMatrices quotient_matrices(const EchoModel& echo, const TransmitDesign& tx);

}  // namespace mfris
