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

#include <string>
#include <vector>

#include "mfris/design.hpp"
#include "mfris/rng.hpp"

namespace mfris {

// Protocol feasible set check. Returns one message per violated rule; an
// empty list means the configuration is feasible within tol (absolute on
// amplitudes normalised by max(1, beta_max)).
std::vector<std::string> validate(const RisConfiguration& cfg, double beta_max, double tol = 1e-9);

// Element-to-face assignment of the split two-group surfaces: the first half
// of the elements serves r, the second half t.
std::vector<int> split_group_mask(int m);

// Uniform phases and protocol-feasible random amplitudes. For ES the total
// per-element power is uniform on [0, beta_max] and split uniformly between
// the faces.
RisConfiguration random_feasible(Protocol p, int m, double beta_max, Rng& rng);

// sum_d ( sum_k ||Theta_d H w_k||^2 + sum_n ||Theta_d H f_n||^2 + sigma_r^2 ||Theta_d||_F^2 )
double amplification_power(const RisConfiguration& cfg, const TransmitDesign& tx, const CMat& H,
                           double sigma_r2);

}  // namespace mfris
