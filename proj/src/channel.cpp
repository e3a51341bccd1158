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

#include "mfris/channel.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace mfris {

CVec steering_vector(double theta_tilde, int n) {
  if (n < 1) throw ConfigError("steering vector length must be >= 1");
  CVec u(n);
  for (int i = 0; i < n; ++i) u[i] = std::polar(1.0, -2.0 * kPi * i * theta_tilde);
  return u;
}

CVec ris_steering(double phi, double varphi, int m_y, int m_z, double spacing) {
  const CVec uz = steering_vector(spacing * std::sin(phi), m_z);
  const CVec uy = steering_vector(spacing * std::cos(phi) * std::cos(varphi), m_y);
  CVec b(m_y * m_z);
  for (int iz = 0; iz < m_z; ++iz) b.segment(iz * m_y, m_y) = uz[iz] * uy;
  return b;
}

CVec sensor_steering(double phi, double varphi, int m_v, int m_h, double spacing) {
  CVec a(m_v + m_h);
  if (m_v > 0) a.head(m_v) = steering_vector(spacing * std::sin(phi), m_v);
  if (m_h > 0) a.tail(m_h) = steering_vector(spacing * std::cos(phi) * std::cos(varphi), m_h);
  return a;
}

CMat bs_los(double phi, double varphi, int m_y, int m_z, int n_tx, double spacing) {
  const CVec b = ris_steering(phi, varphi, m_y, m_z, spacing);
  const CVec u = steering_vector(spacing * std::cos(phi) * std::cos(varphi), n_tx);
  return b * u.transpose();
}

CMat rician_channel(const CMat& los, double path_gain, double kappa, Rng& rng) {
  const double s = std::sqrt(path_gain);
  if (kappa >= 1e12) return s * los;
  const CMat nlos = rng.complex_normal(los.rows(), los.cols());
  return s * (std::sqrt(kappa / (1.0 + kappa)) * los + std::sqrt(1.0 / (1.0 + kappa)) * nlos);
}

TargetResponse target_response(const std::vector<Node>& targets, const ScenarioConfig& cfg, int m_y,
                               int m_z, Rng& rng) {
  const int m = m_y * m_z, ms = cfg.m_sense();
  const int j = static_cast<int>(targets.size());
  TargetResponse t;
  t.A = CMat::Zero(ms, j);
  t.B = CMat::Zero(m, j);
  t.alpha = CVec::Zero(j);
  for (int i = 0; i < j; ++i) {
    const auto& n = targets[i];
    t.A.col(i) = sensor_steering(n.elevation, n.azimuth, cfg.m_v, cfg.m_h, cfg.element_spacing_ratio);
    t.B.col(i) = ris_steering(n.elevation, n.azimuth, m_y, m_z, cfg.element_spacing_ratio);
    const double mag = std::sqrt(cfg.h0() * std::pow(n.distance, -2.0 * cfg.alpha0) * cfg.rcs);
    t.alpha[i] = std::polar(mag, rng.phase());
  }
  t.G = j > 0 ? CMat(t.A * t.alpha.asDiagonal() * t.B.adjoint()) : CMat(CMat::Zero(ms, m));
  return t;
}

std::vector<int> ChannelSet::users_in(Space d) const {
  std::vector<int> out;
  for (int k = 0; k < n_users(); ++k)
    if (user_space[k] == d) out.push_back(k);
  return out;
}

int surface_elements(const ScenarioConfig& cfg) {
  const bool split = cfg.protocol == Protocol::kActive || cfg.protocol == Protocol::kPassive;
  return split ? 2 * cfg.m_elems() : cfg.m_elems();
}

ChannelSet build_channels(const Geometry& geom, const ScenarioConfig& cfg, Rng& rng) {
  const int n = cfg.n_tx, ms = cfg.m_sense();
  const int mz_full = 2 * cfg.m_z;
  const int m = surface_elements(cfg);
  const double s = cfg.element_spacing_ratio;
  const double kappa = cfg.kappa();

  Rng rng_h = rng.split(1);
  Rng rng_g = rng.split(2);
  Rng rng_d = rng.split(3);
  Rng rng_t = rng.split(4);

  ChannelSet ch;
  ch.n_tx = n;
  ch.m_elems = m;
  ch.m_sense = ms;

  const auto& bs = geom.bs;
  const double l_br = cfg.h0() * std::pow(bs.distance, -cfg.alpha0);
  const CMat H_full = rician_channel(bs_los(bs.elevation, bs.azimuth, cfg.m_y, mz_full, n, s), l_br,
                                     kappa, rng_h);
  ch.H = H_full.topRows(m);

  for (const auto& u : geom.users) {
    const double l = cfg.h0() * std::pow(u.distance, -cfg.alpha0);
    const CMat los = ris_steering(u.elevation, u.azimuth, cfg.m_y, mz_full, s);
    const CMat g = rician_channel(los, l, kappa, rng_g);
    ch.g.push_back(g.col(0).head(m));
    ch.user_space.push_back(u.space);
  }

  const CVec a_bs = sensor_steering(bs.elevation, bs.azimuth, cfg.m_v, cfg.m_h, s);
  const CVec u_bs = steering_vector(s * std::cos(bs.elevation) * std::cos(bs.azimuth), n);
  const CMat los_d = a_bs * u_bs.transpose();
  for (Space d : kSpaces) ch.Hd[index_of(d)] = rician_channel(los_d, l_br, kappa, rng_d);

  for (Space d : kSpaces) {
    std::vector<Node> tg;
    for (const auto& t : geom.targets)
      if (t.space == d) tg.push_back(t);
    TargetResponse full = target_response(tg, cfg, cfg.m_y, mz_full, rng_t);
    TargetResponse& out = ch.targets[index_of(d)];
    out.A = full.A;
    out.alpha = full.alpha;
    out.B = full.B.topRows(m);
    out.G = tg.empty() ? CMat(CMat::Zero(ms, m)) : CMat(out.A * out.alpha.asDiagonal() * out.B.adjoint());
  }
  return ch;
}

// ---------------------------------------------------------------------------

namespace {

void write_block(std::ostream& os, const std::string& name, const CMat& M) {
  os << "block " << name << " " << M.rows() << " " << M.cols() << "\n";
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) os << ",";
      os << M(i, j).real() << "," << M(i, j).imag();
    }
    os << "\n";
  }
}

}  // namespace

void write_channels(const ChannelSet& ch, std::ostream& os) {
  const auto old_prec = os.precision(17);
  os << "mfris-channels 1\n";
  write_block(os, "H", ch.H);
  CMat g(ch.m_elems, ch.n_users());
  CMat spaces(ch.n_users(), 1);
  for (int k = 0; k < ch.n_users(); ++k) {
    g.col(k) = ch.g[k];
    spaces(k, 0) = static_cast<double>(index_of(ch.user_space[k]));
  }
  write_block(os, "g", g);
  write_block(os, "user_space", spaces);
  for (Space d : kSpaces) {
    const std::string tag = space_tag(d);
    const auto& t = ch.targets[index_of(d)];
    write_block(os, "Hd_" + tag, ch.Hd[index_of(d)]);
    write_block(os, "A_" + tag, t.A);
    write_block(os, "B_" + tag, t.B);
    write_block(os, "alpha_" + tag, t.alpha);
  }
  os.precision(old_prec);
}

ChannelSet read_channels(std::istream& is) {
  std::string magic;
  int version = 0;
  is >> magic >> version;
  if (magic != "mfris-channels" || version != 1) throw ConfigError("not a channel dump");
  std::map<std::string, CMat> blocks;
  std::string word;
  while (is >> word) {
    if (word != "block") throw ConfigError("channel dump: expected 'block'");
    std::string name;
    long rows = 0, cols = 0;
    is >> name >> rows >> cols;
    if (!is || rows < 0 || cols < 0) throw ConfigError("channel dump: bad block header");
    CMat M(rows, cols);
    std::string line;
    std::getline(is, line);
    for (long i = 0; i < rows; ++i) {
      if (!std::getline(is, line)) throw ConfigError("channel dump: truncated block " + name);
      std::stringstream ss(line);
      for (long j = 0; j < cols; ++j) {
        double re = 0, im = 0;
        char comma = 0;
        ss >> re >> comma >> im;
        if (j + 1 < cols) ss >> comma;
        if (!ss && !(ss.eof() && j + 1 == cols)) throw ConfigError("channel dump: bad entry in " + name);
        M(i, j) = {re, im};
      }
    }
    blocks[name] = M;
  }
  auto need = [&](const std::string& n) -> const CMat& {
    auto it = blocks.find(n);
    if (it == blocks.end()) throw ConfigError("channel dump: missing block " + n);
    return it->second;
  };
  ChannelSet ch;
  ch.H = need("H");
  ch.m_elems = static_cast<int>(ch.H.rows());
  ch.n_tx = static_cast<int>(ch.H.cols());
  const CMat& g = need("g");
  const CMat& sp = need("user_space");
  for (Eigen::Index k = 0; k < g.cols(); ++k) {
    ch.g.push_back(g.col(k));
    ch.user_space.push_back(sp(k, 0).real() < 0.5 ? Space::kReflect : Space::kRefract);
  }
  for (Space d : kSpaces) {
    const std::string tag = space_tag(d);
    auto& t = ch.targets[index_of(d)];
    ch.Hd[index_of(d)] = need("Hd_" + tag);
    t.A = need("A_" + tag);
    t.B = need("B_" + tag);
    t.alpha = need("alpha_" + tag).col(0);
    ch.m_sense = static_cast<int>(ch.Hd[index_of(d)].rows());
    t.G = t.alpha.size() > 0 ? CMat(t.A * t.alpha.asDiagonal() * t.B.adjoint())
                             : CMat(CMat::Zero(ch.m_sense, ch.m_elems));
  }
  return ch;
}

}  // namespace mfris
