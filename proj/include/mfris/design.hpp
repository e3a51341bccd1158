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

// Decision variables of the joint design.

#pragma once

#include <array>
#include <vector>

#include "mfris/types.hpp"

namespace mfris {

// Communication beamformers (columns of W, N x K) and dedicated sensing
// beamformers (columns of F, N x N).
struct TransmitDesign {
  CMat W;
  CMat F;

  // Transmit covariance W W^H + F F^H.
  CMat covariance() const { return W * W.adjoint() + F * F.adjoint(); }
  // All beams side by side, [W F].
  CMat beams() const {
    CMat X(W.rows(), W.cols() + F.cols());
    X << W, F;
    return X;
  }
  static TransmitDesign zeros(int n_tx, int k) {
    return {CMat::Zero(n_tx, k), CMat::Zero(n_tx, n_tx)};
  }
};

// Receive filters, one per space. For surfaces with sensing elements the
// filters have M_s entries; for the conventional baselines the echo is
// collected at the BS and the filters have N entries.
struct SensingFilters {
  std::array<CVec, 2> m;
  std::array<bool, 2> degenerate{false, false};

  const CVec& operator[](Space d) const { return m[index_of(d)]; }
  CVec& operator[](Space d) { return m[index_of(d)]; }
};

// Surface state. theta_r / theta_t hold the diagonal of Theta_r / Theta_t,
// i.e. the physical per-element gain sqrt(beta) e^{j phase}.
struct RisConfiguration {
  Protocol protocol = Protocol::kES;
  CVec theta_r;
  CVec theta_t;
  // Per element face assignment (0 = r, 1 = t). Used by MS and by the
  // split two-group surfaces; empty otherwise.
  std::vector<int> mode_mask;
  // Time split for TS (tau_r + tau_t = 1); ignored by other protocols.
  double tau_r = 1.0;
  double tau_t = 0.0;

  int size() const { return static_cast<int>(theta_r.size()); }
  const CVec& theta(Space d) const { return d == Space::kReflect ? theta_r : theta_t; }
  CVec& theta(Space d) { return d == Space::kReflect ? theta_r : theta_t; }
};

}  // namespace mfris
