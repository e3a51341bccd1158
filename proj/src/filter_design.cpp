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

#include "mfris/filter_design.hpp"

#include <cmath>

namespace mfris {

QuotientMatrices build_quotient_matrices(Space d, const ChannelSet& ch, const RisConfiguration& ris,
                                         const TransmitDesign& tx, const NoiseLevels& noise) {
  return quotient_matrices(echo_model(d, ch, ris, noise), tx);
}

namespace {

// Rotate so the largest-magnitude entry is real and positive.
void fix_phase(CVec& v) {
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  const double a = std::abs(v[idx]);
  if (a > 0.0) v *= std::conj(v[idx]) / a;
}

}  // namespace

RayleighResult generalized_rayleigh_argmax(const CMat& A, const CMat& B, double p) {
  const auto n = B.rows();
  if (B.cols() != n || A.rows() != n || A.cols() != n) throw SolverError("quotient size mismatch");
  const double bn = B.cwiseAbs().maxCoeff();
  if (!(bn > 0.0)) throw SolverError("quotient denominator is zero");
  const CMat Bs = (0.5 / bn) * (B + B.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> eb(Bs);
  const RVec& lb = eb.eigenvalues();
  if (!(lb.minCoeff() > 1e-12 * std::max(lb.cwiseAbs().maxCoeff(), 1e-300)))
    throw SolverError("quotient denominator is not positive definite");

  RayleighResult r;
  const double an = A.cwiseAbs().maxCoeff();
  if (!(an > 0.0)) {
    r.v = CVec::Zero(n);
    r.v[0] = std::sqrt(p);
    r.degenerate = true;
    r.value = 0.0;
    return r;
  }
  const CMat As = (0.5 / an) * (A + A.adjoint());
  const CMat Binv_half = eb.eigenvectors() * lb.cwiseInverse().cwiseSqrt().asDiagonal() *
                         eb.eigenvectors().adjoint();
  CMat C = Binv_half * As * Binv_half;
  C = 0.5 * (C + C.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMat> ec(C);
  const Eigen::Index top = n - 1;  // eigenvalues ascending
  CVec v = Binv_half * ec.eigenvectors().col(top);
  v *= std::sqrt(p) / v.norm();
  fix_phase(v);
  r.v = v;
  r.value = (v.adjoint() * A * v)(0, 0).real() / (v.adjoint() * B * v)(0, 0).real();
  return r;
}

RayleighResult optimal_filter(Space d, const ChannelSet& ch, const RisConfiguration& ris,
                              const TransmitDesign& tx, const NoiseLevels& noise, double p_sense) {
  const QuotientMatrices q = build_quotient_matrices(d, ch, ris, tx, noise);
  return generalized_rayleigh_argmax(q.signal, q.interference, p_sense);
}

SensingFilters optimal_filters(const ChannelSet& ch, const RisConfiguration& ris,
                               const TransmitDesign& tx, const NoiseLevels& noise, double p_sense) {
  SensingFilters f;
  for (Space d : kSpaces) {
    const RayleighResult r = optimal_filter(d, ch, ris, tx, noise, p_sense);
    f[d] = r.v;
    f.degenerate[index_of(d)] = r.degenerate;
  }
  return f;
}

}  // namespace mfris
