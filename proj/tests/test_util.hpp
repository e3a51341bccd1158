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

// Random instances shared by the unit tests.

#pragma once

#include <cmath>
#include <cstdint>

#include "mfris/channel.hpp"
#include "mfris/design.hpp"
#include "mfris/echo.hpp"
#include "mfris/ris_model.hpp"
#include "mfris/scenario.hpp"

namespace mfris::testing {

struct Instance {
  ScenarioConfig cfg;
  ChannelSet ch;
  NoiseLevels noise;
  RisConfiguration ris;
  TransmitDesign tx;
  SensingFilters filters;
};

// Channels at cfg plus a random feasible surface, random beams scaled to
// the BS budget and random filters of norm^2 p_sense.
inline Instance random_instance(const ScenarioConfig& base, std::uint64_t seed) {
  Instance in;
  in.cfg = base;
  in.cfg.seed = seed;
  Rng geo(mix_seed(seed, 1)), chan(mix_seed(seed, 2)), rest(mix_seed(seed, 77));
  const Geometry g = sample_geometry(in.cfg, geo);
  in.ch = build_channels(g, in.cfg, chan);
  in.noise = noise_levels(in.cfg);
  in.ris = random_feasible(in.cfg.protocol, in.ch.m_elems, in.cfg.beta_max, rest);
  const int n = in.cfg.n_tx, k = in.cfg.n_users();
  in.tx.W = rest.complex_normal(n, k);
  in.tx.F = rest.complex_normal(n, n);
  const double p = in.tx.W.squaredNorm() + in.tx.F.squaredNorm();
  const double s = std::sqrt(0.5 * in.cfg.p_bs_w() / p);
  in.tx.W *= s;
  in.tx.F *= s;
  const int dim = senses_on_surface(in.cfg.protocol) ? in.cfg.m_sense() : n;
  for (Space d : kSpaces) {
    CVec m = rest.complex_normal(dim, 1);
    in.filters[d] = std::sqrt(in.cfg.p_sense) * m / m.norm();
  }
  return in;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace mfris::testing
