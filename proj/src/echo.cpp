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

#include "mfris/echo.hpp"

namespace mfris {

NoiseLevels noise_levels(const ScenarioConfig& cfg) {
  NoiseLevels n;
  n.user2 = cfg.sigma_user2();
  n.ris2 = amplifies(cfg.protocol) ? cfg.sigma_ris2() : 0.0;
  n.sense2 = cfg.sigma_sense2();
  return n;
}

CMat round_trip_response(const ChannelSet& ch, Space d) {
  const auto& t = ch.targets[index_of(d)];
  if (t.alpha.size() == 0) return CMat::Zero(ch.m_elems, ch.m_elems);
  return t.B.conjugate() * t.alpha.asDiagonal() * t.B.adjoint();
}

EchoModel echo_model(Space d, const ChannelSet& ch, const RisConfiguration& ris,
                     const NoiseLevels& noise) {
  EchoModel e;
  const CVec& th = ris.theta(d);
  const CMat ThetaH = th.asDiagonal() * ch.H;  // Theta_d H
  if (senses_on_surface(ris.protocol)) {
    const CMat GTheta = ch.G(d) * th.asDiagonal();
    e.E = ch.G(d) * ThetaH;
    e.L = ch.Hd[index_of(d)];
    e.Nc = noise.ris2 * GTheta * GTheta.adjoint();
    e.Nc.diagonal().array() += noise.sense2;
  } else {
    const int n = ch.n_tx;
    e.E = ThetaH.transpose() * round_trip_response(ch, d) * ThetaH;
    e.L = CMat::Zero(n, n);
    // H^T Theta Theta^H conj(H) = (Theta H)^T conj(Theta H)
    e.Nc = noise.ris2 * ThetaH.transpose() * ThetaH.conjugate();
    e.Nc.diagonal().array() += noise.sense2;
  }
  return e;
}

QuotientMatrices quotient_matrices(const EchoModel& echo, const TransmitDesign& tx) {
  const CMat R = tx.covariance();
  QuotientMatrices q;
  q.signal = echo.E * R * echo.E.adjoint();
  q.interference = echo.L * R * echo.L.adjoint() + echo.Nc;
  // remove rounding asymmetry
  q.signal = 0.5 * (q.signal + q.signal.adjoint()).eval();
  q.interference = 0.5 * (q.interference + q.interference.adjoint()).eval();
  return q;
}

}  // namespace mfris
