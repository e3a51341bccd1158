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

#include "mfris/filter_design.hpp"
#include "mfris/ris_opt.hpp"
#include "test_util.hpp"

using namespace mfris;
using mfris::testing::Instance;
using mfris::testing::random_instance;
using mfris::testing::rel_err;
using Catch::Approx;

namespace {

const std::vector<Space> kBoth{Space::kReflect, Space::kRefract};

double quad(const CVec& x, const CMat& A) { return (x.adjoint() * A * x)(0, 0).real(); }

// Instance whose beams meet the rate thresholds on the drawn surface.
Instance feasible_instance(ScenarioConfig cfg, std::uint64_t seed) {
  cfg.r_th = 0.05;
  Instance in = random_instance(cfg, seed);
  in.filters = optimal_filters(in.ch, in.ris, in.tx, in.noise, cfg.p_sense);
  const TxProblem tp = make_tx_problem(in.ch, in.ris, in.filters, in.noise,
                                       limits_from(cfg, cfg.n_users()), kBoth);
  in.tx = initial_tx(tp, SolverOptions{});
  in.filters = optimal_filters(in.ch, in.ris, in.tx, in.noise, cfg.p_sense);
  return in;
}

}  // namespace

TEST_CASE("ris: quadratic forms match the scalar expressions", "[ris_opt]") {
  ScenarioConfig cfg;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const Instance in = random_instance(cfg, s);
    const Limits lim = limits_from(cfg, 4);
    const RisProblem p = make_ris_problem(in.ch, in.ris, in.tx, in.filters, in.noise, lim, kBoth);
    const TxProblem tp = make_tx_problem(in.ch, in.ris, in.filters, in.noise, lim, kBoth);
    const FpAuxiliaries aux = update_auxiliaries(tp, in.tx);
    const RisMatrices mx = build_ris_matrices(p, aux);
    const CMat X = in.tx.beams();
    double u_direct = in.noise.ris2 * (in.ris.theta_r.squaredNorm() + in.ris.theta_t.squaredNorm());
    for (Space d : kSpaces) {
      const CVec& phys = in.ris.theta(d);
      const CVec th = phys.conjugate();
      const Eigen::RowVectorXcd mGT =
          (in.filters[d].adjoint() * in.ch.G(d)).cwiseProduct(phys.transpose());
      CHECK(rel_err(quad(th, mx.Gm[index_of(d)]), mGT.squaredNorm()) <= 1e-10);

      cplx lin = 0.0;
      for (int c = 0; c < X.cols(); ++c) {
        const cplx lam = c < 4 ? aux.lambda[index_of(d)][c] : aux.eta[index_of(d)][c - 4];
        lin += std::conj(lam) * (mGT * (in.ch.H * X.col(c)))(0, 0);
      }
      CHECK(std::abs((th.adjoint() * mx.t[index_of(d)])(0, 0) - lin) <= 1e-10 * std::abs(lin));
      u_direct += (phys.asDiagonal() * in.ch.H * X).squaredNorm();
    }
    CHECK(rel_err(quad(in.ris.theta_r.conjugate(), mx.U) + quad(in.ris.theta_t.conjugate(), mx.U),
                  u_direct) <= 1e-10);

    for (int k = 0; k < 4; ++k) {
      const Space d = in.ch.user_space[k];
      const CVec th = in.ris.theta(d).conjugate();
      const Eigen::RowVectorXcd eff =
          in.ch.g[k].conjugate().cwiseProduct(in.ris.theta(d)).transpose() * in.ch.H;
      CHECK(rel_err(quad(th, mx.S[k]), std::norm((eff * in.tx.W.col(k))(0, 0))) <= 1e-10);
      const double sinr = comm_sinr(k, in.ch, in.ris, in.tx, in.noise);
      CHECK(rel_err(quad(th, mx.S[k]) / (quad(th, mx.Sbar[k]) + in.noise.user2), sinr) <= 1e-10);
    }
  }
}

TEST_CASE("ris: zero beams give zero linear terms", "[ris_opt]") {
  ScenarioConfig cfg;
  Instance in = random_instance(cfg, 2);
  in.tx = TransmitDesign::zeros(cfg.n_tx, 4);
  const Limits lim = limits_from(cfg, 4);
  const RisProblem p = make_ris_problem(in.ch, in.ris, in.tx, in.filters, in.noise, lim, kBoth);
  const FpAuxiliaries aux =
      update_auxiliaries(make_tx_problem(in.ch, in.ris, in.filters, in.noise, lim, kBoth), in.tx);
  const RisMatrices mx = build_ris_matrices(p, aux);
  CHECK(mx.t[0].norm() == 0.0);
  CHECK(mx.S[0].norm() == 0.0);
  CHECK(mx.Gm[0].norm() > 0.0);
}

TEST_CASE("ris: SOCP arity and tangency", "[ris_opt]") {
  ScenarioConfig cfg;
  cfg.r_th = 0.05;
  const Instance in = feasible_instance(cfg, 6);
  const Limits lim = limits_from(cfg, 4);
  const RisProblem p = make_ris_problem(in.ch, in.ris, in.tx, in.filters, in.noise, lim, kBoth);
  const FpAuxiliaries aux =
      update_auxiliaries(make_tx_problem(in.ch, in.ris, in.filters, in.noise, lim, kBoth), in.tx);
  const RisSocp socp = build_ris_socp(p, aux, in.ris);
  CHECK(socp.n_coeff == 4 * cfg.m_elems());
  CHECK(socp.n_aux == 2 * cfg.m_elems());
  REQUIRE(socp.qos_linear_at_expansion.size() == 4);
  for (size_t i = 0; i < 4; ++i)
    CHECK(rel_err(socp.qos_linear_at_expansion[i], socp.qos_quadratic_at_expansion[i]) <= 1e-10);
}

TEST_CASE("ris: SCA ascends and the result is feasible", "[ris_opt]") {
  ScenarioConfig cfg;
  cfg.r_th = 0.05;
  for (std::uint64_t s : {3u, 9u}) {
    const Instance in = feasible_instance(cfg, s);
    const Limits lim = limits_from(cfg, 4);
    const RisProblem p = make_ris_problem(in.ch, in.ris, in.tx, in.filters, in.noise, lim, kBoth);
    ScaOptions opts;
    opts.relative_tol = true;
    const double start = ris_objective(p, in.ris);
    const RisResult r = solve_ris(p, in.ris, opts);
    CHECK(r.failures == 0);
    CHECK(validate(r.ris, cfg.beta_max, 1e-6).empty());
    CHECK(ris_violation(p, r.ris) <= 1e-6);
    double prev = start;
    for (const auto& st : r.steps) {
      CHECK(st.objective >= prev - 10.0 * cfg.solver_tol * std::max(1.0, prev));
      CHECK(st.tangency_gap <= 1e-10);
      prev = st.objective;
    }
    CHECK(r.objective > start);
  }
}

TEST_CASE("ris: two-element surface against a grid", "[ris_opt]") {
  ScenarioConfig cfg;
  cfg.n_tx = 2;
  cfg.m_y = 2;
  cfg.m_z = 1;
  cfg.users_r = 1;
  cfg.users_t = 0;
  cfg.targets_r = 1;
  cfg.targets_t = 0;
  cfg.r_th = 0.2;
  cfg.protocol = Protocol::kMS;
  Instance in = random_instance(cfg, 5);
  in.ris.mode_mask = {0, 0};
  in.ris.theta_t.setZero();
  in.ris.theta_r = CVec::Constant(2, std::sqrt(0.5 * cfg.beta_max));
  in = [&] {
    Instance out = in;
    const std::vector<Space> r_only{Space::kReflect};
    out.filters = optimal_filters(out.ch, out.ris, out.tx, out.noise, cfg.p_sense);
    const TxProblem tp = make_tx_problem(out.ch, out.ris, out.filters, out.noise, limits_from(cfg, 1), r_only);
    out.tx = initial_tx(tp, SolverOptions{});
    out.filters = optimal_filters(out.ch, out.ris, out.tx, out.noise, cfg.p_sense);
    return out;
  }();
  const std::vector<Space> r_only{Space::kReflect};
  const RisProblem p =
      make_ris_problem(in.ch, in.ris, in.tx, in.filters, in.noise, limits_from(cfg, 1), r_only);
  ScaOptions opts;
  opts.relative_tol = true;
  opts.tol = 1e-6;
  opts.max_iters = 100;
  const RisResult r = solve_ris(p, in.ris, opts);
  REQUIRE(ris_feasible(p, r.ris, 1e-6));

  // phase step pi/8, power step beta_max/8
  double best = 0.0;
  RisConfiguration c = in.ris;
  for (int a0 = 0; a0 <= 8; ++a0)
    for (int p0 = 0; p0 < 16; ++p0)
      for (int a1 = 0; a1 <= 8; ++a1)
        for (int p1 = 0; p1 < 16; ++p1) {
          c.theta_r[0] = std::polar(std::sqrt(cfg.beta_max * a0 / 8.0), kPi * p0 / 8.0);
          c.theta_r[1] = std::polar(std::sqrt(cfg.beta_max * a1 / 8.0), kPi * p1 / 8.0);
          if (!ris_feasible(p, c, 0.0)) continue;
          best = std::max(best, ris_objective(p, c));
        }
  REQUIRE(best > 0.0);
  CHECK(r.objective >= 0.95 * best);
}

TEST_CASE("ris: amplitude projections", "[ris_opt]") {
  ScenarioConfig cfg;
  cfg.protocol = Protocol::kSTAR;
  Instance in = random_instance(cfg, 1);
  const Limits lim = limits_from(cfg, 4);
  RisConfiguration c = in.ris;
  c.theta_r *= 1.7;
  const RisProblem p = make_ris_problem(in.ch, c, in.tx, in.filters, in.noise, lim, kBoth);
  const RisConfiguration proj = project_amplitudes(p, c);
  for (int i = 0; i < proj.size(); ++i)
    CHECK(std::norm(proj.theta_r[i]) + std::norm(proj.theta_t[i]) == Approx(1.0).epsilon(1e-12));

  ScenarioConfig pc;
  pc.protocol = Protocol::kPassive;
  Instance pin = random_instance(pc, 1);
  RisConfiguration q = pin.ris;
  q.theta_r *= 0.4;
  const RisProblem pp = make_ris_problem(pin.ch, q, pin.tx, pin.filters, pin.noise, limits_from(pc, 4), kBoth);
  const RisConfiguration qq = project_amplitudes(pp, q);
  for (int i = 0; i < qq.size(); ++i) {
    const double serving = q.mode_mask[i] == 0 ? std::abs(qq.theta_r[i]) : std::abs(qq.theta_t[i]);
    CHECK(serving == Approx(1.0).epsilon(1e-12));
  }
}
