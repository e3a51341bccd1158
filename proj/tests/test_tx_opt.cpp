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
#include "mfris/tx_opt.hpp"
#include "test_util.hpp"

using namespace mfris;
using mfris::testing::random_instance;
using mfris::testing::rel_err;
using Catch::Approx;

namespace {

const std::vector<Space> kBoth{Space::kReflect, Space::kRefract};

TxProblem problem_of(const mfris::testing::Instance& in) {
  Limits lim = limits_from(in.cfg, in.cfg.n_users());
  return make_tx_problem(in.ch, in.ris, in.filters, in.noise, lim, kBoth);
}

}  // namespace

TEST_CASE("tx: quadratic transform is tight at the closed-form auxiliaries", "[tx_opt]") {
  ScenarioConfig cfg;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const auto in = random_instance(cfg, s);
    const TxProblem p = problem_of(in);
    const FpAuxiliaries aux = update_auxiliaries(p, in.tx);
    CHECK(rel_err(fp_surrogate(p, aux, in.tx), tx_objective(p, in.tx)) <= 1e-9);
    double direct = 0.0;
    for (Space d : kSpaces) direct += sensing_sinr_scalar(d, in.ch, in.ris, in.tx, in.filters, in.noise);
    CHECK(rel_err(tx_objective(p, in.tx), direct) <= 1e-10);
    for (size_t i = 0; i < p.spaces.size(); ++i) {
      // delta is the denominator of the echo SINR
      const auto& sp = p.spaces[i];
      const double l = (sp.m.adjoint() * sp.echo.L * in.tx.beams()).squaredNorm();
      CHECK(aux.delta[i] > 0.0);
      CHECK(aux.delta[i] == Approx(l + (sp.m.adjoint() * sp.echo.Nc * sp.m)(0, 0).real()).epsilon(1e-12));
    }
    // any other auxiliaries give a lower bound
    FpAuxiliaries off = aux;
    off.lambda[0] *= cplx(0.8, 0.1);
    CHECK(fp_surrogate(p, off, in.tx) <= tx_objective(p, in.tx) * (1.0 + 1e-12));
  }
}

TEST_CASE("tx: auxiliaries under filter scaling", "[tx_opt]") {
  ScenarioConfig cfg;
  auto in = random_instance(cfg, 4);
  const TxProblem p = problem_of(in);
  const FpAuxiliaries a = update_auxiliaries(p, in.tx);
  const cplx c(1.5, -2.0);
  in.filters[Space::kReflect] *= c;
  const TxProblem q = problem_of(in);
  const FpAuxiliaries b = update_auxiliaries(q, in.tx);
  // lambda = conj-linear numerator over quadratic denominator: scales by conj(c) / |c|^2
  CHECK((b.lambda[0] - a.lambda[0] * std::conj(c) / std::norm(c)).norm() <= 1e-10 * a.lambda[0].norm());
  CHECK(rel_err(fp_surrogate(q, b, in.tx), fp_surrogate(p, a, in.tx)) <= 1e-10);

  in.tx.W.col(1).setZero();
  const FpAuxiliaries z = update_auxiliaries(problem_of(in), in.tx);
  CHECK(z.lambda[0][1] == cplx(0.0, 0.0));
}

TEST_CASE("tx: matrices and SOCP arity", "[tx_opt]") {
  ScenarioConfig cfg;
  const auto in = random_instance(cfg, 5);
  const TxProblem p = problem_of(in);
  const TxMatrices m = build_tx_matrices(p);
  REQUIRE(m.T.size() == 4);
  for (int k = 0; k < 4; ++k) {
    const CVec w = in.tx.W.col(k);
    const cplx direct = (p.users[k].a.adjoint() * w)(0, 0);
    CHECK(rel_err((w.adjoint() * m.T[k] * w)(0, 0).real(), std::norm(direct)) <= 1e-10);
  }
  const TxSocp socp = build_tx_socp(p, update_auxiliaries(p, in.tx), in.tx);
  CHECK(socp.n_decision == 2 * cfg.n_tx * (cfg.n_users() + cfg.n_tx));
  REQUIRE(socp.qos_linear_at_expansion.size() == 4);
  for (size_t i = 0; i < 4; ++i)
    CHECK(rel_err(socp.qos_linear_at_expansion[i], socp.qos_quadratic_at_expansion[i]) <= 1e-10);
}

TEST_CASE("tx: SCA ascends and stays feasible", "[tx_opt]") {
  ScenarioConfig cfg;
  for (std::uint64_t s : {2u, 7u}) {
    auto in = random_instance(cfg, s);
    in.filters = optimal_filters(in.ch, in.ris, in.tx, in.noise, cfg.p_sense);
    Limits lim = limits_from(cfg, 4);
    lim.min_sinr.assign(4, 0.05);
    const TxProblem p = make_tx_problem(in.ch, in.ris, in.filters, in.noise, lim, kBoth);
    ScaOptions opts;
    opts.relative_tol = true;
    const TransmitDesign start = initial_tx(p, opts.solver);
    CHECK(tx_violation(p, start) <= 1e-6);
    const TxResult r = solve_tx(p, start, opts);
    CHECK(r.failures == 0);
    CHECK(tx_violation(p, r.tx) <= 1e-6);
    double prev = tx_objective(p, start);
    for (const auto& st : r.steps) {
      CHECK(st.objective >= prev - 10.0 * cfg.solver_tol * std::max(1.0, prev));
      CHECK(st.tangency_gap <= 1e-10);
      prev = st.objective;
    }
    CHECK(r.objective >= tx_objective(p, start));

    // restarting from the result moves the objective by at most the tolerance
    const TxResult again = solve_tx(p, r.tx, opts);
    CHECK(std::abs(again.objective - r.objective) <= opts.tol * r.objective + 1e-12);
  }
}

TEST_CASE("tx: tiny instance against random search", "[tx_opt]") {
  ScenarioConfig cfg;
  cfg.n_tx = 2;
  cfg.m_y = 2;
  cfg.m_z = 1;
  cfg.users_r = 1;
  cfg.users_t = 0;
  cfg.targets_r = 1;
  cfg.targets_t = 0;
  cfg.r_th = 0.05;
  auto in = random_instance(cfg, 3);
  in.ris.theta_t.setZero();
  in.filters = optimal_filters(in.ch, in.ris, in.tx, in.noise, cfg.p_sense);
  const std::vector<Space> r_only{Space::kReflect};
  const TxProblem p = make_tx_problem(in.ch, in.ris, in.filters, in.noise, limits_from(cfg, 1), r_only);
  ScaOptions opts;
  opts.relative_tol = true;
  opts.tol = 1e-6;
  opts.max_iters = 100;
  const TxResult r = solve_tx(p, initial_tx(p, opts.solver), opts);
  REQUIRE(tx_violation(p, r.tx) <= 1e-6);

  // uniform draws inside the power ball, kept when every constraint holds
  Rng rng(123);
  double best = 0.0;
  const int dim = 2 * (1 + 2);
  for (int i = 0; i < 1000000; ++i) {
    CVec z = rng.complex_normal(dim, 1);
    z *= std::sqrt(p.p_bs) * std::pow(rng.uniform(), 1.0 / (2.0 * dim)) / z.norm();
    TransmitDesign t{z.head(2), Eigen::Map<const CMat>(z.data() + 2, 2, 2)};
    if (tx_violation(p, t) > 0.0) continue;
    best = std::max(best, tx_objective(p, t));
  }
  REQUIRE(best > 0.0);
  CHECK(r.objective >= 0.98 * best);
}
