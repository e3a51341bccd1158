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

#include "mfris/tx_opt.hpp"

#include <chrono>
#include <cmath>

#include "lifting.hpp"

namespace mfris {

using detail::CBlock;
using detail::kMargin;

TxProblem make_tx_problem(const ChannelSet& ch, const RisConfiguration& ris,
                          const SensingFilters& filters, const NoiseLevels& noise,
                          const Limits& limits, const std::vector<Space>& objective_spaces) {
  TxProblem p;
  p.n_tx = ch.n_tx;
  p.n_users = ch.n_users();
  for (Space d : objective_spaces) p.spaces.push_back({d, echo_model(d, ch, ris, noise), filters[d]});
  for (int k = 0; k < p.n_users; ++k) {
    const Space d = ch.user_space[k];
    const CVec row = ch.g[k].conjugate().cwiseProduct(ris.theta(d));  // g_k^H Theta_d
    UserLink u;
    u.a = (row.transpose() * ch.H).adjoint();
    u.noise = noise.ris2 * row.squaredNorm() + noise.user2;
    u.min_sinr = k < static_cast<int>(limits.min_sinr.size()) ? limits.min_sinr[k] : 0.0;
    p.users.push_back(u);
  }
  p.p_bs = limits.p_bs;
  p.has_ris_power = limits.check_ris_power;
  p.p_ris = limits.p_ris;
  RVec gain = RVec::Zero(ch.m_elems);
  for (Space d : kSpaces) gain += ris.theta(d).cwiseAbs2();
  p.Q = ch.H.adjoint() * gain.asDiagonal() * ch.H;
  p.Q = 0.5 * (p.Q + p.Q.adjoint()).eval();
  p.ris_noise_power = noise.ris2 * gain.sum();
  return p;
}

namespace {

double space_sinr(const SpaceEcho& s, const CMat& X) {
  const CVec e = s.echo.E.adjoint() * s.m;
  const CVec l = s.echo.L.adjoint() * s.m;
  const double num = (e.adjoint() * X).squaredNorm();
  const double den = (l.adjoint() * X).squaredNorm() + (s.m.adjoint() * s.echo.Nc * s.m)(0, 0).real();
  return num / den;
}

}  // namespace

double tx_objective(const TxProblem& p, const TransmitDesign& tx) {
  const CMat X = tx.beams();
  double v = 0.0;
  for (const auto& s : p.spaces) v += space_sinr(s, X);
  return v;
}

std::vector<double> tx_user_sinr(const TxProblem& p, const TransmitDesign& tx) {
  std::vector<double> out;
  const CMat X = tx.beams();
  for (int k = 0; k < p.n_users; ++k) {
    const Eigen::RowVectorXcd r = p.users[k].a.adjoint() * X;
    const double sig = std::norm(r[k]);
    out.push_back(sig / (r.squaredNorm() - sig + p.users[k].noise));
  }
  return out;
}

double tx_violation(const TxProblem& p, const TransmitDesign& tx) {
  double worst = 0.0;
  worst = std::max(worst, (bs_power(tx) - p.p_bs) / p.p_bs);
  if (p.has_ris_power) {
    const CMat X = tx.beams();
    const double q = (X.adjoint() * p.Q * X).trace().real() + p.ris_noise_power;
    worst = std::max(worst, (q - p.p_ris) / p.p_ris);
  }
  const auto sinr = tx_user_sinr(p, tx);
  for (int k = 0; k < p.n_users; ++k)
    if (p.users[k].min_sinr > 0.0)
      worst = std::max(worst, (p.users[k].min_sinr - sinr[k]) / p.users[k].min_sinr);
  return worst;
}

double compute_delta(const SpaceEcho& s, const TransmitDesign& tx) {
  const CVec l = s.echo.L.adjoint() * s.m;
  return (l.adjoint() * tx.beams()).squaredNorm() + (s.m.adjoint() * s.echo.Nc * s.m)(0, 0).real();
}

FpAuxiliaries update_auxiliaries(const TxProblem& p, const TransmitDesign& tx) {
  FpAuxiliaries aux;
  for (const auto& s : p.spaces) {
    const double delta = compute_delta(s, tx);
    const CVec e = s.echo.E.adjoint() * s.m;  // m^H E x = e^H x
    aux.lambda.push_back((e.adjoint() * tx.W).transpose() / delta);
    aux.eta.push_back((e.adjoint() * tx.F).transpose() / delta);
    aux.delta.push_back(delta);
  }
  return aux;
}

double fp_surrogate(const TxProblem& p, const FpAuxiliaries& aux, const TransmitDesign& tx) {
  double v = 0.0;
  for (size_t i = 0; i < p.spaces.size(); ++i) {
    const auto& s = p.spaces[i];
    const CVec e = s.echo.E.adjoint() * s.m;
    const Eigen::RowVectorXcd aw = e.adjoint() * tx.W;
    const Eigen::RowVectorXcd af = e.adjoint() * tx.F;
    for (Eigen::Index k = 0; k < aw.size(); ++k) v += 2.0 * (std::conj(aux.lambda[i][k]) * aw[k]).real();
    for (Eigen::Index n = 0; n < af.size(); ++n) v += 2.0 * (std::conj(aux.eta[i][n]) * af[n]).real();
    const double c = aux.lambda[i].squaredNorm() + aux.eta[i].squaredNorm();
    v -= c * compute_delta(s, tx);
  }
  return v;
}

TxMatrices build_tx_matrices(const TxProblem& p) {
  TxMatrices m;
  for (const auto& s : p.spaces) {
    const CVec l = s.echo.L.adjoint() * s.m;
    m.P.push_back(l * l.adjoint());
  }
  m.Q = p.Q;
  for (const auto& u : p.users) m.T.push_back(u.a * u.a.adjoint());
  return m;
}

TxSocp build_tx_socp(const TxProblem& p, const FpAuxiliaries& aux, const TransmitDesign& expansion) {
  const int n = p.n_tx, k_users = p.n_users, cols = k_users + n;
  TxSocp out;
  out.var_scale = std::sqrt(p.p_bs);
  const double s = out.var_scale;
  ConicBuilder b;
  const int base = b.add_variables(2 * n * cols);
  out.n_decision = 2 * n * cols;
  const int t = b.add_variables(1);
  auto col = [&](int c) { return CBlock{base + 2 * n * c, n}; };
  const CMat Xbar = expansion.beams();

  // objective: linear part of the surrogate and the leakage quadratic
  std::vector<CVec> lin(cols, CVec::Zero(n));
  CMat P = CMat::Zero(n, n);
  double constant = 0.0;
  for (size_t i = 0; i < p.spaces.size(); ++i) {
    const auto& sp = p.spaces[i];
    const CVec e = sp.echo.E.adjoint() * sp.m;
    for (int c = 0; c < cols; ++c) {
      const cplx lam = c < k_users ? aux.lambda[i][c] : aux.eta[i][c - k_users];
      lin[c] += lam * e;  // 2 Re{conj(lam) e^H x} = 2 Re{(lam e)^H x}
    }
    const double cd = aux.lambda[i].squaredNorm() + aux.eta[i].squaredNorm();
    const CVec l = sp.echo.L.adjoint() * sp.m;
    P += cd * (l * l.adjoint());
    constant += cd * (sp.m.adjoint() * sp.echo.Nc * sp.m)(0, 0).real();
  }
  double ref = tx_objective(p, expansion);
  out.obj_scale = 1.0 / std::max(ref, 1e-6);
  for (int c = 0; c < cols; ++c) {
    for (int i = 0; i < n; ++i) {
      b.add_objective(col(c).re(i), -out.obj_scale * 2.0 * s * lin[c][i].real());
      b.add_objective(col(c).im(i), -out.obj_scale * 2.0 * s * lin[c][i].imag());
    }
  }
  b.set_objective(t, out.obj_scale);
  b.add_objective_offset(out.obj_scale * constant);
  out.objective_const = constant;
  {
    std::vector<AffineRow> rows;
    rows.push_back(AffineRow{}.add(t, 1.0));
    rows.push_back(AffineRow{{}, 0.5});
    if (P.cwiseAbs().maxCoeff() > 0.0) {
      const RMat R = lift_complex_quadratic(P);
      for (int c = 0; c < cols; ++c) detail::append_factor_rows(rows, col(c), R, s);
    }
    b.add_rotated_soc(std::move(rows), "leakage");
  }

  // BS power
  {
    std::vector<AffineRow> rows;
    rows.push_back(AffineRow{{}, std::sqrt(1.0 - kMargin)});
    for (int v = 0; v < 2 * n * cols; ++v) rows.push_back(AffineRow{}.add(base + v, 1.0));
    b.add_soc(std::move(rows), "bs_power");
  }

  // surface power
  if (p.has_ris_power) {
    const double budget = p.p_ris * (1.0 - kMargin) - p.ris_noise_power;
    if (!(budget > 0.0)) throw InfeasibleError("surface noise alone exceeds the surface power budget");
    std::vector<AffineRow> rows;
    rows.push_back(AffineRow{{}, 1.0});
    rows.push_back(AffineRow{{}, 0.5});
    const RMat R = lift_complex_quadratic(p.Q);
    for (int c = 0; c < cols; ++c) detail::append_factor_rows(rows, col(c), R, s / std::sqrt(budget));
    b.add_rotated_soc(std::move(rows), "ris_power");
  }

  // linearised rate constraints
  for (int k = 0; k < k_users; ++k) {
    const auto& u = p.users[k];
    if (!(u.min_sinr > 0.0)) continue;
    const double gamma = u.min_sinr * (1.0 + kMargin);
    const double nu = gamma * u.noise;
    const cplx beta = u.a.dot(Xbar.col(k));  // a^H w_bar
    AffineRow bound;
    detail::add_re_inner(bound, col(k), beta * u.a, 2.0 * s / nu);
    bound.constant = (-std::norm(beta) - nu) / nu;
    std::vector<AffineRow> rows;
    rows.push_back(bound);
    rows.push_back(AffineRow{{}, 0.5});
    const double f = std::sqrt(gamma / nu) * s;
    for (int c = 0; c < cols; ++c) {
      if (c == k) continue;
      AffineRow re, im;
      detail::add_re_inner(re, col(c), u.a, f);
      detail::add_im_inner(im, col(c), u.a, f);
      rows.push_back(std::move(re));
      rows.push_back(std::move(im));
    }
    // tangency read-back: linear side at the expansion point
    RVec xbar = RVec::Zero(b.n_vars());
    for (int c = 0; c < cols; ++c) detail::write_block(xbar, col(c), Xbar.col(c), 1.0 / s);
    double lin_val = bound.constant;
    for (const auto& [j, coef] : bound.terms) lin_val += coef * xbar[j];
    out.qos_linear_at_expansion.push_back(lin_val * nu + nu);
    out.qos_quadratic_at_expansion.push_back(std::norm(beta));
    b.add_rotated_soc(std::move(rows), "qos_" + std::to_string(k));
  }
  out.program = std::move(b).build();
  return out;
}

TransmitDesign extract_tx(const TxSocp& socp, const RVec& x, int n_tx, int n_users) {
  TransmitDesign tx = TransmitDesign::zeros(n_tx, n_users);
  for (int c = 0; c < n_users + n_tx; ++c) {
    const CVec v = detail::read_block(x, CBlock{2 * n_tx * c, n_tx}, socp.var_scale);
    if (c < n_users)
      tx.W.col(c) = v;
    else
      tx.F.col(c - n_users) = v;
  }
  return tx;
}

TxResult solve_tx(const TxProblem& p, const TransmitDesign& start, const ScaOptions& opts) {
  using clock = std::chrono::steady_clock;
  TxResult res;
  res.tx = start;
  res.objective = tx_objective(p, start);
  const double feas_tol = 1e-6;
  for (int it = 1; it <= opts.max_iters; ++it) {
    const auto t0 = clock::now();
    ScaStep step;
    step.iter = it;
    const FpAuxiliaries aux = update_auxiliaries(p, res.tx);
    TxSocp socp = build_tx_socp(p, aux, res.tx);
    for (size_t i = 0; i < socp.qos_linear_at_expansion.size(); ++i) {
      const double q = socp.qos_quadratic_at_expansion[i];
      const double gap = std::abs(socp.qos_linear_at_expansion[i] - q) / std::max(q, 1e-300);
      step.tangency_gap = std::max(step.tangency_gap, gap);
    }
    const ConicSolution sol = solve(socp.program, opts.solver);
    step.status = sol.status;
    step.solver_iterations = sol.iterations;
    if (usable(sol)) {
      const TransmitDesign cand = extract_tx(socp, sol.x, p.n_tx, p.n_users);
      const double obj = tx_objective(p, cand);
      step.surrogate = -sol.objective / socp.obj_scale;
      if (tx_violation(p, cand) <= feas_tol && obj >= res.objective) {
        const double prev = res.objective;
        res.tx = cand;
        res.objective = obj;
        step.accepted = true;
        step.objective = obj;
        step.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        res.steps.push_back(step);
        if (opts.converged(prev, obj)) {
          res.converged = true;
          break;
        }
        continue;
      }
      // no ascent: the current point is already stationary to solver accuracy
      step.objective = res.objective;
      step.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
      res.steps.push_back(step);
      res.converged = true;
      break;
    }
    ++res.failures;
    res.note = "transmit SOCP returned " + to_string(sol.status);
    step.objective = res.objective;
    step.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    res.steps.push_back(step);
    break;
  }
  return res;
}

std::optional<CMat> min_power_beams(const TxProblem& p, const CMat& F, const SolverOptions& opts) {
  const int n = p.n_tx, k_users = p.n_users;
  const double s = std::sqrt(p.p_bs);
  ConicBuilder b;
  const int base = b.add_variables(2 * n * k_users);
  const int tau = b.add_variables(1);
  auto col = [&](int c) { return CBlock{base + 2 * n * c, n}; };
  b.set_objective(tau, 1.0);
  {
    std::vector<AffineRow> rows;
    rows.push_back(AffineRow{}.add(tau, 1.0));
    for (int v = 0; v < 2 * n * k_users; ++v) rows.push_back(AffineRow{}.add(base + v, 1.0));
    b.add_soc(std::move(rows), "norm");
  }
  const double f_power = F.squaredNorm();
  const double bs_left = p.p_bs * (1.0 - kMargin) - f_power;
  if (!(bs_left > 0.0)) return std::nullopt;
  {
    std::vector<AffineRow> rows;
    rows.push_back(AffineRow{{}, std::sqrt(bs_left / p.p_bs)});
    for (int v = 0; v < 2 * n * k_users; ++v) rows.push_back(AffineRow{}.add(base + v, 1.0));
    b.add_soc(std::move(rows), "bs_power");
  }
  if (p.has_ris_power) {
    const double left = p.p_ris * (1.0 - kMargin) - p.ris_noise_power -
                        (F.adjoint() * p.Q * F).trace().real();
    if (!(left > 0.0)) return std::nullopt;
    std::vector<AffineRow> rows;
    rows.push_back(AffineRow{{}, 1.0});
    const RMat R = lift_complex_quadratic(p.Q);
    for (int c = 0; c < k_users; ++c) detail::append_factor_rows(rows, col(c), R, s / std::sqrt(left));
    b.add_soc(std::move(rows), "ris_power");
  }
  for (int k = 0; k < k_users; ++k) {
    const auto& u = p.users[k];
    if (!(u.min_sinr > 0.0)) continue;
    const double gamma = u.min_sinr * (1.0 + 2.0 * kMargin);
    const double sig = std::sqrt(u.noise);
    std::vector<AffineRow> rows;
    AffineRow lead;
    detail::add_re_inner(lead, col(k), u.a, s / (sig * std::sqrt(gamma)));
    rows.push_back(lead);
    AffineRow imag;
    detail::add_im_inner(imag, col(k), u.a, s / sig);
    b.add_equality(imag);
    for (int i = 0; i < k_users; ++i) {
      if (i == k) continue;
      AffineRow re, im;
      detail::add_re_inner(re, col(i), u.a, s / sig);
      detail::add_im_inner(im, col(i), u.a, s / sig);
      rows.push_back(std::move(re));
      rows.push_back(std::move(im));
    }
    for (Eigen::Index nidx = 0; nidx < F.cols(); ++nidx) {
      const cplx v = u.a.dot(F.col(nidx)) / sig;
      rows.push_back(AffineRow{{}, v.real()});
      rows.push_back(AffineRow{{}, v.imag()});
    }
    rows.push_back(AffineRow{{}, 1.0});
    b.add_soc(std::move(rows), "sinr_" + std::to_string(k));
  }
  const ConicSolution sol = solve(std::move(b).build(), opts);
  if (!usable(sol)) return std::nullopt;
  CMat W(n, k_users);
  for (int c = 0; c < k_users; ++c) W.col(c) = detail::read_block(sol.x, col(c), s);
  TransmitDesign tx{W, F};
  if (tx_violation(p, tx) > 1e-7) return std::nullopt;
  return W;
}

std::optional<ScaledBeams> budget_scaled_beams(const TxProblem& p, const SolverOptions& opts) {
  const int n = p.n_tx, k_users = p.n_users;
  const double s = std::sqrt(p.p_bs);
  ConicBuilder b;
  const int base = b.add_variables(2 * n * k_users);
  const int t = b.add_variables(1);
  auto col = [&](int c) { return CBlock{base + 2 * n * c, n}; };
  b.set_objective(t, 1.0);
  {
    // ||W||^2 <= t p_bs
    std::vector<AffineRow> rows;
    rows.push_back(AffineRow{}.add(t, 1.0));
    rows.push_back(AffineRow{{}, 0.5});
    for (int v = 0; v < 2 * n * k_users; ++v) rows.push_back(AffineRow{}.add(base + v, 1.0));
    b.add_rotated_soc(std::move(rows), "bs_power");
  }
  if (p.has_ris_power) {
    // sum w^H Q w + ris noise <= t p_ris
    std::vector<AffineRow> rows;
    rows.push_back(AffineRow{{}, -p.ris_noise_power / p.p_ris}.add(t, 1.0));
    rows.push_back(AffineRow{{}, 0.5});
    const RMat R = lift_complex_quadratic(p.Q);
    for (int c = 0; c < k_users; ++c) detail::append_factor_rows(rows, col(c), R, s / std::sqrt(p.p_ris));
    b.add_rotated_soc(std::move(rows), "ris_power");
  }
  for (int k = 0; k < k_users; ++k) {
    const auto& u = p.users[k];
    if (!(u.min_sinr > 0.0)) continue;
    const double gamma = u.min_sinr * (1.0 + 2.0 * kMargin);
    const double sig = std::sqrt(u.noise);
    std::vector<AffineRow> rows;
    AffineRow lead;
    detail::add_re_inner(lead, col(k), u.a, s / (sig * std::sqrt(gamma)));
    rows.push_back(lead);
    AffineRow imag;
    detail::add_im_inner(imag, col(k), u.a, s / sig);
    b.add_equality(imag);
    for (int i = 0; i < k_users; ++i) {
      if (i == k) continue;
      AffineRow re, im;
      detail::add_re_inner(re, col(i), u.a, s / sig);
      detail::add_im_inner(im, col(i), u.a, s / sig);
      rows.push_back(std::move(re));
      rows.push_back(std::move(im));
    }
    rows.push_back(AffineRow{{}, 1.0});
    b.add_soc(std::move(rows), "sinr_" + std::to_string(k));
  }
  const ConicSolution sol = solve(std::move(b).build(), opts);
  if (!usable(sol)) return std::nullopt;
  ScaledBeams out;
  out.W = CMat(n, k_users);
  for (int c = 0; c < k_users; ++c) out.W.col(c) = detail::read_block(sol.x, col(c), s);
  out.scale = sol.x[t];
  return out;
}

TransmitDesign initial_tx(const TxProblem& p, const SolverOptions& opts) {
  const int n = p.n_tx;
  // dominant echo directions, each space normalised to unit energy
  CMat gram = CMat::Zero(n, n);
  for (const auto& s : p.spaces) {
    const double e = s.echo.E.squaredNorm();
    if (e > 0.0) gram += s.echo.E.adjoint() * s.echo.E / e;
  }
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (gram + gram.adjoint()));
  CMat U = es.eigenvectors().rowwise().reverse();
  const double q_per_unit = std::max(p.Q.trace().real(), 0.0);
  for (double frac : {0.5, 0.25, 0.1, 0.01, 0.0}) {
    double rho2 = frac * p.p_bs / n;
    if (p.has_ris_power && q_per_unit > 0.0)
      rho2 = std::min(rho2, frac * (p.p_ris - p.ris_noise_power) / q_per_unit);
    const CMat F = std::sqrt(std::max(rho2, 0.0)) * U;
    if (auto W = min_power_beams(p, F, opts)) return TransmitDesign{*W, F};
  }
  throw InfeasibleError("rate constraints cannot be met for the given surface configuration");
}

}  // namespace mfris
