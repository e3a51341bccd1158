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

// Closed-form receive filters: maximise m^H A m / m^H B m with ||m||^2 = p.

#pragma once

#include "mfris/channel.hpp"
#include "mfris/design.hpp"
#include "mfris/echo.hpp"

namespace mfris {

QuotientMatrices build_quotient_matrices(Space d, const ChannelSet& ch, const RisConfiguration& ris,
                                         const TransmitDesign& tx, const NoiseLevels& noise);

struct RayleighResult {
  CVec v;             // ||v||^2 = p
  double value = 0;   // attained quotient
  bool degenerate = false;  // numerator identically zero
};

// Top eigenvector of B^{-1} A via B^{-1/2} A B^{-1/2}. Throws SolverError
// unless B is Hermitian positive definite (min eigenvalue > 1e-12 ||B||).
// A zero A returns the first canonical vector flagged degenerate.
RayleighResult generalized_rayleigh_argmax(const CMat& A, const CMat& B, double p);

SensingFilters optimal_filters(const ChannelSet& ch, const RisConfiguration& ris,
                               const TransmitDesign& tx, const NoiseLevels& noise, double p_sense);

// Filter for one space only.
RayleighResult optimal_filter(Space d, const ChannelSet& ch, const RisConfiguration& ris,
                              const TransmitDesign& tx, const NoiseLevels& noise, double p_sense);

}  // namespace mfris
