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

#include "mfris/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "mfris/ris_model.hpp"

namespace mfris {

double comm_sinr(int k, const ChannelSet& ch, const RisConfiguration& ris, const TransmitDesign& tx,
                 const NoiseLevels& noise) {
  const Space d = ch.user_space[k];
  const CVec& th = ris.theta(d);
  // row g_k^H Theta_d
  const CVec row = ch.g[k].conjugate().cwiseProduct(th);
  const Eigen::RowVectorXcd eff = row.transpose() * ch.H;
  double signal = 0.0, interf = 0.0;
  for (Eigen::Index i = 0; i < tx.W.cols(); ++i) {
    const double p = std::norm((eff * tx.W.col(i))(0, 0));
    if (i == k)
      signal = p;
    else
      interf += p;
  }
  for (Eigen::Index n = 0; n < tx.F.cols(); ++n) interf += std::norm((eff * tx.F.col(n))(0, 0));
  interf += noise.ris2 * row.squaredNorm() + noise.user2;
  return signal / interf;
}

double sensing_sinr_scalar(Space d, const ChannelSet& ch, const RisConfiguration& ris,
                           const TransmitDesign& tx, const SensingFilters& filters,
                           const NoiseLevels& noise) {
  const CVec& m = filters[d];
  const CVec& th = ris.theta(d);
  const CMat X = tx.beams();
  double num = 0.0, den = 0.0;
  if (senses_on_surface(ris.protocol)) {
    // m^H G_d Theta_d as a row, then times H x
    const Eigen::RowVectorXcd mG = m.adjoint() * ch.G(d);
    const Eigen::RowVectorXcd mGT = mG.cwiseProduct(th.transpose());
    const Eigen::RowVectorXcd mHd = m.adjoint() * ch.Hd[index_of(d)];
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
      num += std::norm((mGT * (ch.H * X.col(c)))(0, 0));
      den += std::norm((mHd * X.col(c))(0, 0));
    }
    den += noise.ris2 * mGT.squaredNorm();
  } else {
    // echo at the BS: m^H H^T Theta conj(B) diag(alpha) B^H Theta H x
    const CMat& B = ch.targets[index_of(d)].B;
    const CVec& alpha = ch.targets[index_of(d)].alpha;
    const Eigen::RowVectorXcd mHT = m.adjoint() * ch.H.transpose();
    const Eigen::RowVectorXcd back = mHT.cwiseProduct(th.transpose());  // m^H H^T Theta
    const Eigen::RowVectorXcd via_targets = (back * B.conjugate()).cwiseProduct(alpha.transpose());
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
      const CVec incident = th.cwiseProduct(ch.H * X.col(c));  // Theta H x
      const CVec toward = B.adjoint() * incident;               // B^H Theta H x
      num += std::norm((via_targets * toward)(0, 0));
    }
    den += noise.ris2 * back.squaredNorm();
  }
  den += noise.sense2 * m.squaredNorm();
  return num / den;
}

double sensing_sinr_matrix(Space d, const ChannelSet& ch, const RisConfiguration& ris,
                           const TransmitDesign& tx, const SensingFilters& filters,
                           const NoiseLevels& noise) {
  const EchoModel e = echo_model(d, ch, ris, noise);
  const QuotientMatrices q = quotient_matrices(e, tx);
  const CVec& m = filters[d];
  const double num = (m.adjoint() * q.signal * m)(0, 0).real();
  const double den = (m.adjoint() * q.interference * m)(0, 0).real();
  return num / den;
}

double bs_power(const TransmitDesign& tx) { return tx.W.squaredNorm() + tx.F.squaredNorm(); }

Limits limits_from(const ScenarioConfig& cfg, int n_users) {
  Limits l;
  l.p_bs = cfg.p_bs_w();
  l.p_ris = cfg.p_ris_w();
  l.check_ris_power = amplifies(cfg.protocol);
  l.beta_max = cfg.beta_max;
  l.p_sense = cfg.p_sense;
  l.min_sinr.assign(n_users, cfg.gamma_th());
  return l;
}

MetricsReport evaluate(const ChannelSet& ch, const RisConfiguration& ris, const TransmitDesign& tx,
                       const SensingFilters& filters, const NoiseLevels& noise, const Limits& lim,
                       double tol) {
  MetricsReport r;
  auto flag = [&](double rel, const std::string& what) {
    r.worst_violation = std::max(r.worst_violation, rel);
    if (rel > tol) {
      std::ostringstream os;
      os << what << " (relative violation " << rel << ")";
      r.violations.push_back(os.str());
    }
  };
  const int k_total = ch.n_users();
  for (int k = 0; k < k_total; ++k) {
    const double s = comm_sinr(k, ch, ris, tx, noise);
    r.user_sinr.push_back(s);
    r.user_rate.push_back(rate_of(s));
    if (k < static_cast<int>(lim.min_sinr.size()) && lim.min_sinr[k] > 0.0)
      flag((lim.min_sinr[k] - s) / lim.min_sinr[k], "QoS of user " + std::to_string(k));
  }
  for (Space d : kSpaces) {
    r.sensing_sinr[index_of(d)] = sensing_sinr_scalar(d, ch, ris, tx, filters, noise);
    r.objective += r.sensing_sinr[index_of(d)];
    const double nm = filters[d].squaredNorm();
    flag(std::abs(nm - lim.p_sense) / lim.p_sense, std::string("filter power of space ") + space_tag(d));
  }
  r.bs_power = bs_power(tx);
  flag((r.bs_power - lim.p_bs) / lim.p_bs, "BS power budget");
  r.ris_power = amplification_power(ris, tx, ch.H, noise.ris2);
  if (lim.check_ris_power) flag((r.ris_power - lim.p_ris) / lim.p_ris, "surface power budget");
  for (const auto& v : validate(ris, lim.beta_max, tol)) r.violations.push_back(v);
  return r;
}

BeamPattern beampattern(const RisConfiguration& ris, const TransmitDesign& tx, const CMat& H, int m_y,
                        int m_z, double spacing, const std::vector<double>& hdeg,
                        const std::vector<double>& vdeg) {
  BeamPattern bp;
  bp.horizontal_deg = hdeg;
  bp.vertical_deg = vdeg;
  const double deg = kPi / 180.0;
  const CMat HX = H * tx.beams();
  for (Space d : kSpaces) {
    const CMat P = ris.theta(d).asDiagonal() * HX;
    const CMat C = P * P.adjoint();
    RMat g(vdeg.size(), hdeg.size());
    for (size_t iv = 0; iv < vdeg.size(); ++iv) {
      for (size_t ih = 0; ih < hdeg.size(); ++ih) {
        // direction (s cos v cos h, cos v sin h, sin v) in surface angles
        const double v = vdeg[iv] * deg, h = hdeg[ih] * deg;
        const double phi = v;
        const double varphi = std::atan2(std::cos(v) * std::cos(h), std::cos(v) * std::sin(h));
        const CVec b = ris_steering(phi, varphi, m_y, m_z, spacing);
        g(iv, ih) = std::max(0.0, (b.adjoint() * C * b)(0, 0).real());
      }
    }
    bp.gain[index_of(d)] = g;
  }
  return bp;
}

void write_beampattern_csv(const BeamPattern& bp, std::ostream& os) {
  os << "face,phi_deg,varphi_deg,gain_db\n";
  os << std::setprecision(9);
  for (Space d : kSpaces) {
    const RMat& g = bp.gain[index_of(d)];
    for (Eigen::Index iv = 0; iv < g.rows(); ++iv)
      for (Eigen::Index ih = 0; ih < g.cols(); ++ih) {
        os << space_tag(d) << "," << bp.vertical_deg[iv] << "," << bp.horizontal_deg[ih] << ",";
        const double v = g(iv, ih);
        if (v > 0.0)
          os << 10.0 * std::log10(v);
        else
          os << "-inf";
        os << "\n";
      }
  }
}

std::vector<Peak> beampattern_peaks(const BeamPattern& bp, Space d, int count) {
  const RMat& g = bp.gain[index_of(d)];
  std::vector<Peak> peaks;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      const double v = g(i, j);
      if (!(v > 0.0)) continue;
      bool is_max = true;
      for (int di = -1; di <= 1 && is_max; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          if (!di && !dj) continue;
          const Eigen::Index a = i + di, b = j + dj;
          if (a < 0 || b < 0 || a >= g.rows() || b >= g.cols()) continue;
          // ties broken towards the earlier cell so plateaus yield one peak
          if (g(a, b) > v || (g(a, b) == v && (a < i || (a == i && b < j)))) {
            is_max = false;
            break;
          }
        }
      if (is_max) peaks.push_back({bp.horizontal_deg[j], bp.vertical_deg[i], v});
    }
  }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.gain > b.gain; });
  if (static_cast<int>(peaks.size()) > count) peaks.resize(count);
  return peaks;
}

}  // namespace mfris
