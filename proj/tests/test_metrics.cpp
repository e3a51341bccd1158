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

#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>

#include "mfris/metrics.hpp"
#include "test_util.hpp"

using namespace mfris;
using mfris::testing::random_instance;
using mfris::testing::rel_err;
using Catch::Approx;

TEST_CASE("metrics: scalar user SINR by hand", "[metrics]") {
  ChannelSet ch;
  ch.n_tx = 1;
  ch.m_elems = 1;
  ch.H = CMat::Constant(1, 1, cplx(0.3, -0.7));
  ch.g = {CVec::Constant(1, cplx(-1.1, 0.4))};
  ch.user_space = {Space::kRefract};
  RisConfiguration ris;
  ris.theta_r = CVec::Constant(1, cplx(5.0, 0.0));  // not the user's face
  ris.theta_t = CVec::Constant(1, std::polar(1.7, 0.9));
  TransmitDesign tx{CMat::Constant(1, 1, cplx(2.0, 1.0)), CMat::Constant(1, 1, cplx(-0.5, 0.25))};
  NoiseLevels nz{0.2, 0.05, 0.1};

  const cplx h = ch.H(0, 0), g = ch.g[0][0], t = ris.theta_t[0];
  const cplx eff = std::conj(g) * t * h;
  const double want = std::norm(eff * tx.W(0, 0)) /
                      (std::norm(eff * tx.F(0, 0)) + 0.05 * std::norm(g) * std::norm(t) + 0.2);
  CHECK(comm_sinr(0, ch, ris, tx, nz) == Approx(want).epsilon(1e-14));

  tx.F.setZero();
  nz.ris2 = 0.0;
  CHECK(comm_sinr(0, ch, ris, tx, nz) == Approx(std::norm(eff * tx.W(0, 0)) / 0.2).epsilon(1e-14));
  tx.W.setZero();
  CHECK(comm_sinr(0, ch, ris, tx, nz) == 0.0);
  CHECK(rate_of(1.0) == 1.0);
}

TEST_CASE("metrics: echo SINR scalar and matrix forms agree", "[metrics]") {
  for (Protocol p : {Protocol::kES, Protocol::kSTAR, Protocol::kActive}) {
    ScenarioConfig cfg;
    cfg.protocol = p;
    for (std::uint64_t s = 1; s <= 10; ++s) {
      const auto in = random_instance(cfg, s);
      for (Space d : kSpaces) {
        const double a = sensing_sinr_scalar(d, in.ch, in.ris, in.tx, in.filters, in.noise);
        const double b = sensing_sinr_matrix(d, in.ch, in.ris, in.tx, in.filters, in.noise);
        CHECK(a > 0.0);
        CHECK(rel_err(a, b) <= 1e-10);
      }
    }
  }
}

TEST_CASE("metrics: echo SINR edge cases", "[metrics]") {
  ScenarioConfig cfg;
  auto in = random_instance(cfg, 3);
  const double base = sensing_sinr_scalar(Space::kReflect, in.ch, in.ris, in.tx, in.filters, in.noise);
  auto scaled = in.filters;
  scaled[Space::kReflect] *= cplx(-2.5, 1.0);
  CHECK(rel_err(sensing_sinr_scalar(Space::kReflect, in.ch, in.ris, in.tx, scaled, in.noise), base) <= 1e-12);
  const auto zero = TransmitDesign::zeros(cfg.n_tx, cfg.n_users());
  CHECK(sensing_sinr_scalar(Space::kRefract, in.ch, in.ris, zero, in.filters, in.noise) == 0.0);
}

TEST_CASE("metrics: quotient matrices are Hermitian and bounded below", "[metrics]") {
  ScenarioConfig cfg;
  const auto in = random_instance(cfg, 8);
  for (Space d : kSpaces) {
    const QuotientMatrices q = quotient_matrices(echo_model(d, in.ch, in.ris, in.noise), in.tx);
    CHECK((q.signal - q.signal.adjoint()).norm() <= 1e-12 * q.signal.norm());
    Eigen::SelfAdjointEigenSolver<CMat> es(q.interference);
    CHECK(es.eigenvalues().minCoeff() >= in.noise.sense2 * (1.0 - 1e-10));

    const QuotientMatrices z =
        quotient_matrices(echo_model(d, in.ch, in.ris, in.noise), TransmitDesign::zeros(cfg.n_tx, 4));
    CHECK(z.signal.norm() == 0.0);
  }
}

TEST_CASE("metrics: transmit power and audit", "[metrics]") {
  TransmitDesign z = TransmitDesign::zeros(3, 2);
  CHECK(bs_power(z) == 0.0);
  TransmitDesign u{CMat::Identity(3, 2), CMat::Identity(3, 3)};
  CHECK(bs_power(u) == Approx(5.0));
  Rng rng(1);
  TransmitDesign r{rng.complex_normal(3, 2), rng.complex_normal(3, 3)};
  double direct = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) direct += std::norm(r.W(i, j));
    for (int j = 0; j < 3; ++j) direct += std::norm(r.F(i, j));
  }
  CHECK(bs_power(r) == Approx(direct).epsilon(1e-14));

  ScenarioConfig cfg;
  cfg.r_th = 0.0;
  const auto in = random_instance(cfg, 2);
  Limits lim = limits_from(cfg, 4);
  lim.p_ris = 1e300;
  const MetricsReport ok = evaluate(in.ch, in.ris, in.tx, in.filters, in.noise, lim);
  CHECK(ok.feasible());
  CHECK(ok.objective == Approx(ok.sensing_sinr[0] + ok.sensing_sinr[1]));
  lim.p_bs = 0.25 * bs_power(in.tx);
  const MetricsReport bad = evaluate(in.ch, in.ris, in.tx, in.filters, in.noise, lim);
  REQUIRE_FALSE(bad.feasible());
  CHECK(bad.violations[0].find("BS power budget") != std::string::npos);
  CHECK(bad.worst_violation == Approx(3.0));
}

TEST_CASE("metrics: beampattern arity and continuity", "[metrics]") {
  ScenarioConfig cfg;
  const auto in = random_instance(cfg, 6);
  std::vector<double> h, v;
  for (int i = -90; i <= 90; ++i) h.push_back(i);
  for (int i = 0; i <= 90; ++i) v.push_back(i);
  const BeamPattern bp = beampattern(in.ris, in.tx, in.ch.H, cfg.m_y, cfg.m_z, 0.5, h, v);
  std::ostringstream os;
  write_beampattern_csv(bp, os);
  const std::string text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 2 * 181 * 91);

  // |d/dangle b^H C b| <= 2 ||C|| ||b|| ||db/dangle||, with ||b||^2 = M and
  // every entry's phase moving at most 2 pi s (m_y + m_z) per radian
  const double step = kPi / 180.0;
  for (Space d : kSpaces) {
    const CMat P = in.ris.theta(d).asDiagonal() * in.ch.H * in.tx.beams();
    const double c_norm = (P * P.adjoint()).norm();
    const double lip = 2.0 * c_norm * cfg.m_elems() * 2.0 * kPi * 0.5 * (cfg.m_y + cfg.m_z);
    const RMat& g = bp.gain[index_of(d)];
    double worst = 0.0;
    for (Eigen::Index i = 0; i < g.rows(); ++i)
      for (Eigen::Index j = 0; j < g.cols(); ++j) {
        if (i + 1 < g.rows()) worst = std::max(worst, std::abs(g(i + 1, j) - g(i, j)));
        if (j + 1 < g.cols()) worst = std::max(worst, std::abs(g(i, j + 1) - g(i, j)));
      }
    CHECK(worst <= lip * step);
  }

  const BeamPattern zero = beampattern(in.ris, TransmitDesign::zeros(cfg.n_tx, 4), in.ch.H, cfg.m_y,
                                       cfg.m_z, 0.5, h, v);
  CHECK(zero.gain[0].norm() == 0.0);
  CHECK(beampattern_peaks(zero, Space::kReflect, 2).empty());
}

TEST_CASE("metrics: beampattern peaks", "[metrics]") {
  BeamPattern bp;
  bp.horizontal_deg = {-1, 0, 1, 2, 3};
  bp.vertical_deg = {0, 1, 2};
  bp.gain[0] = RMat::Zero(3, 5);
  bp.gain[0](1, 1) = 5.0;
  bp.gain[0](0, 4) = 2.0;
  bp.gain[0](2, 3) = 1.0;
  bp.gain[1] = RMat::Zero(3, 5);
  const auto pk = beampattern_peaks(bp, Space::kReflect, 2);
  REQUIRE(pk.size() == 2);
  CHECK(pk[0].horizontal_deg == 0.0);
  CHECK(pk[0].vertical_deg == 1.0);
  CHECK(pk[1].gain == 2.0);
}
