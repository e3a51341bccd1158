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

#include "mfris/ris_opt.hpp"

#include <chrono>
#include <cmath>
#include <optional>

#include "lifting.hpp"
#include "mfris/ris_model.hpp"

namespace mfris {

using detail::kMargin;

RisProblem make_ris_problem(const ChannelSet& ch, const RisConfiguration& start,
                            const TransmitDesign& tx, const SensingFilters& filters,
                            const NoiseLevels& noise, const Limits& limits,
                            const std::vector<Space>& spaces) {
  RisProblem p;
  p.ch = &ch;
  p.tx = tx;
  p.filters = filters;
  p.noise = noise;
  p.limits = limits;
  p.spaces = spaces;
  p.protocol = start.protocol;
  p.mode_mask = start.mode_mask;
  p.tau_r = start.tau_r;
  p.tau_t = start.tau_t;
  const int m = start.size();
  for (auto& a : p.allowed) a.assign(m, 1);
  if (!start.mode_mask.empty()) {
    if (static_cast<int>(start.mode_mask.size()) != m) throw ConfigError("mode mask size mismatch");
    for (int i = 0; i < m; ++i) p.allowed[start.mode_mask[i] == 0 ? 1 : 0][i] = 0;
  }
  if (start.protocol == Protocol::kTS) {
    for (Space d : kSpaces) {
      bool used = false;
      for (Space s : spaces) used = used || s == d;
      if (!used) p.allowed[index_of(d)].assign(m, 0);
    }
  }
  return p;
}

namespace {

// Per-space quantities for fixed filter and transmit design.
struct SpaceTerms {
  Space d;
  CVec q;                // noise weights: sigma_r^2 sum |q_m|^2 |phi_m|^2
  std::vector<CVec> hx;  // H x for every beam
  CMat A;                // four-hop round trip R_d
  double fixed = 0.0;    // leakage + sigma_s^2 ||m||^2
};

SpaceTerms space_terms(const RisProblem& p, Space d) {
  const ChannelSet& ch = *p.ch;
  const CVec& m = p.filters[d];
  SpaceTerms s;
  s.d = d;
  const CMat X = p.tx.beams();
  for (Eigen::Index c = 0; c < X.cols(); ++c) s.hx.push_back(ch.H * X.col(c));
  s.fixed = p.noise.sense2 * m.squaredNorm();
  if (senses_on_surface(p.protocol)) {
    s.q = ch.G(d).transpose() * m.conjugate();  // (m^H G)^T
    const Eigen::RowVectorXcd mHd = m.adjoint() * ch.Hd[index_of(d)];
    s.fixed += (mHd * X).squaredNorm();
  } else {
    s.q = ch.H * m.conjugate();  // (m^H H^T)^T
    s.A = round_trip_response(ch, d);
  }
  return s;
}

// Echo of one beam and its linearisation in the physical coefficients:
// f(phi) ~ c^T phi + c0.
void echo_linearisation(const RisProblem& p, const SpaceTerms& s, const CVec& hx, const CVec& phi_bar,
                        CVec& c, cplx& c0) {
  if (senses_on_surface(p.protocol)) {
    c = s.q.cwiseProduct(hx);
    c0 = 0.0;
    return;
  }
  // f = phi^T diag(q) R diag(hx) phi, symmetrised
  const CVec left = s.q.cwiseProduct(s.A * hx.cwiseProduct(phi_bar));
  const CVec right = hx.cwiseProduct(s.A.transpose() * s.q.cwiseProduct(phi_bar));
  c = left + right;
  const cplx f = phi_bar.transpose() * left;
  c0 = -f;
}

struct VarMap {
  std::array<std::vector<int>, 2> re, im;
  int count = 0;
};

void add_re(AffineRow& row, const VarMap& v, int f, const CVec& u, double scale) {
  for (int i = 0; i < static_cast<int>(u.size()); ++i) {
    if (v.re[f][i] < 0) continue;
    row.add(v.re[f][i], scale * u[i].real());
    row.add(v.im[f][i], scale * u[i].imag());
  }
}

void add_im(AffineRow& row, const VarMap& v, int f, const CVec& u, double scale) {
  for (int i = 0; i < static_cast<int>(u.size()); ++i) {
    if (v.re[f][i] < 0) continue;
    row.add(v.im[f][i], scale * u[i].real());
    row.add(v.re[f][i], -scale * u[i].imag());
  }
}

double amplitude_cap(Protocol p, double beta_max) {
  return (p == Protocol::kSTAR || p == Protocol::kPassive) ? 1.0 : std::sqrt(beta_max);
}

}  // namespace

RisMatrices build_ris_matrices(const RisProblem& p, const FpAuxiliaries& aux) {
  if (!senses_on_surface(p.protocol)) throw SolverError("matrix form is defined for sensing surfaces");
  const ChannelSet& ch = *p.ch;
  const int m = ch.m_elems;
  const int k_users = ch.n_users();
  const CMat X = p.tx.beams();
  const CMat HX = ch.H * X;
  RisMatrices r;
  for (auto& t : r.t) t = CVec::Zero(m);
  for (auto& g : r.Gm) g = CMat::Zero(m, m);
  for (size_t i = 0; i < p.spaces.size(); ++i) {
    const Space d = p.spaces[i];
    const CVec q = ch.G(d).transpose() * p.filters[d].conjugate();
    CVec mix = CVec::Zero(X.rows());
    for (int c = 0; c < X.cols(); ++c) {
      const cplx lam = c < k_users ? aux.lambda[i][c] : aux.eta[i][c - k_users];
      mix += std::conj(lam) * X.col(c);
    }
    r.t[index_of(d)] = q.cwiseProduct(ch.H * mix);
    r.Gm[index_of(d)] = q.cwiseAbs2().asDiagonal();
  }
  for (int k = 0; k < k_users; ++k) {
    const CVec gc = ch.g[k].conjugate();
    const CVec s = gc.cwiseProduct(HX.col(k));
    r.S.push_back(s * s.adjoint());
    CMat sb = CMat::Zero(m, m);
    for (int c = 0; c < X.cols(); ++c) {
      if (c == k) continue;
      const CVec si = gc.cwiseProduct(HX.col(c));
      sb += si * si.adjoint();
    }
    sb.diagonal() += (p.noise.ris2 * ch.g[k].cwiseAbs2()).cast<cplx>();
    r.Sbar.push_back(sb);
  }
  RVec u = HX.cwiseAbs2().rowwise().sum();
  u.array() += p.noise.ris2;
  r.U = u.cast<cplx>().asDiagonal();
  return r;
}

double ris_objective(const RisProblem& p, const RisConfiguration& ris) {
  return tx_objective(make_tx_problem(*p.ch, ris, p.filters, p.noise, p.limits, p.spaces), p.tx);
}

double ris_violation(const RisProblem& p, const RisConfiguration& ris) {
  return tx_violation(make_tx_problem(*p.ch, ris, p.filters, p.noise, p.limits, p.spaces), p.tx);
}

bool ris_feasible(const RisProblem& p, const RisConfiguration& ris, double tol) {
  if (!validate(ris, p.limits.beta_max).empty()) return false;
  return ris_violation(p, ris) <= tol;
}

namespace {

struct SurfaceVars {
  VarMap v;
  std::array<std::vector<int>, 2> amp;
  int n_coeff = 0;
  int n_aux = 0;
};

SurfaceVars add_surface_variables(ConicBuilder& b, const RisProblem& p) {
  const int m = p.ch->m_elems;
  SurfaceVars s;
  for (int f = 0; f < 2; ++f) {
    s.v.re[f].assign(m, -1);
    s.v.im[f].assign(m, -1);
    for (int i = 0; i < m; ++i) {
      if (!p.allowed[f][i]) continue;
      s.v.re[f][i] = b.add_variables(1);
      s.v.im[f][i] = b.add_variables(1);
    }
  }
  s.n_coeff = b.n_vars();
  if (senses_on_surface(p.protocol)) {
    for (int f = 0; f < 2; ++f) {
      s.amp[f].assign(m, -1);
      for (int i = 0; i < m; ++i)
        if (p.allowed[f][i]) s.amp[f][i] = b.add_variables(1);
    }
    s.n_aux = b.n_vars() - s.n_coeff;
  }
  return s;
}

void add_amplitude_constraints(ConicBuilder& b, const RisProblem& p, const SurfaceVars& sv,
                               const std::array<CVec, 2>& phi_bar) {
  const int m = p.ch->m_elems;
  const VarMap& v = sv.v;
  const double cap = amplitude_cap(p.protocol, p.limits.beta_max);
  for (int e = 0; e < m; ++e) {
    if (senses_on_surface(p.protocol)) {
      for (int f = 0; f < 2; ++f) {
        if (sv.amp[f][e] < 0) continue;
        std::vector<AffineRow> rows;
        rows.push_back(AffineRow{}.add(sv.amp[f][e], 1.0));
        rows.push_back(AffineRow{}.add(v.re[f][e], 1.0));
        rows.push_back(AffineRow{}.add(v.im[f][e], 1.0));
        b.add_soc(std::move(rows), "modulus");
      }
      if (p.form == AmplitudeForm::kPower) {
        std::vector<AffineRow> rows;
        rows.push_back(AffineRow{{}, cap * std::sqrt(1.0 - kMargin)});
        for (int f = 0; f < 2; ++f)
          if (sv.amp[f][e] >= 0) rows.push_back(AffineRow{}.add(sv.amp[f][e], 1.0));
        b.add_soc(std::move(rows), "amplitude");
      } else {
        AffineRow row{{}, cap * (1.0 - kMargin)};
        for (int f = 0; f < 2; ++f)
          if (sv.amp[f][e] >= 0) row.add(sv.amp[f][e], -1.0);
        b.add_nonneg(std::move(row), "amplitude");
      }
    } else {
      std::vector<AffineRow> rows;
      rows.push_back(AffineRow{{}, cap * std::sqrt(1.0 - kMargin)});
      for (int f = 0; f < 2; ++f) {
        if (v.re[f][e] < 0) continue;
        rows.push_back(AffineRow{}.add(v.re[f][e], 1.0));
        rows.push_back(AffineRow{}.add(v.im[f][e], 1.0));
      }
      if (rows.size() > 1) b.add_soc(std::move(rows), "amplitude");
      if (p.protocol == Protocol::kActive) {
        // |phi|^2 >= 1 through its tangent plane at the expansion point
        for (int f = 0; f < 2; ++f) {
          if (v.re[f][e] < 0) continue;
          const cplx a = phi_bar[f][e];
          AffineRow row{{}, -std::norm(a) - 1.0 - 1e-9};
          row.add(v.re[f][e], 2.0 * a.real());
          row.add(v.im[f][e], 2.0 * a.imag());
          b.add_nonneg(std::move(row), "min_gain");
        }
      }
    }
  }
}

// sum_e u_e |phi_e|^2 <= cap with u = sum_x |H x|^2 + sigma_r^2
void add_surface_power(ConicBuilder& b, const RisProblem& p, const VarMap& v, const CMat& HX, double cap) {
  const int m = p.ch->m_elems;
  RVec u = HX.cwiseAbs2().rowwise().sum();
  u.array() += p.noise.ris2;
  std::vector<AffineRow> rows;
  rows.push_back(AffineRow{{}, 1.0});
  rows.push_back(AffineRow{{}, 0.5});
  const double inv = 1.0 / std::sqrt(cap);
  for (int f = 0; f < 2; ++f)
    for (int e = 0; e < m; ++e) {
      if (v.re[f][e] < 0) continue;
      const double a = std::sqrt(u[e]) * inv;
      rows.push_back(AffineRow{}.add(v.re[f][e], a));
      rows.push_back(AffineRow{}.add(v.im[f][e], a));
    }
  b.add_rotated_soc(std::move(rows), "ris_power");
}

// Linearised rate constraints. With slack >= 0 the bound of user k becomes
// linearised signal - gamma (interference + noise) >= slack * gamma sigma_k^2.
void add_rate_rows(ConicBuilder& b, const RisProblem& p, const VarMap& v, const CMat& HX,
                   const std::array<CVec, 2>& phi_bar, int slack, std::vector<double>* lin_out,
                   std::vector<double>* quad_out) {
  const ChannelSet& ch = *p.ch;
  const int m = ch.m_elems;
  for (int k = 0; k < ch.n_users(); ++k) {
    const double th = k < static_cast<int>(p.limits.min_sinr.size()) ? p.limits.min_sinr[k] : 0.0;
    if (!(th > 0.0)) continue;
    const int f = index_of(ch.user_space[k]);
    const double gamma = th * (1.0 + kMargin);
    const double nu = gamma * p.noise.user2;
    // g_k^H Phi H x = v^H phi with v = g_k o conj(H x)
    auto vec = [&](Eigen::Index c) { return CVec(ch.g[k].cwiseProduct(HX.col(c).conjugate())); };
    const CVec vk = vec(k);
    const cplx beta = vk.dot(phi_bar[f]);
    AffineRow bound{{}, (-std::norm(beta) - nu) / nu};
    add_re(bound, v, f, beta * vk, 2.0 / nu);
    double lin_val = bound.constant;
    for (const auto& [j, coef] : bound.terms) {
      // read the expansion point back through the variable map
      for (int e = 0; e < m; ++e) {
        if (v.re[f][e] == j) lin_val += coef * phi_bar[f][e].real();
        if (v.im[f][e] == j) lin_val += coef * phi_bar[f][e].imag();
      }
    }
    if (slack >= 0) bound.add(slack, -1.0);
    std::vector<AffineRow> rows;
    rows.push_back(bound);
    rows.push_back(AffineRow{{}, 0.5});
    const double fct = std::sqrt(gamma / nu);
    for (Eigen::Index c = 0; c < HX.cols(); ++c) {
      if (c == k) continue;
      const CVec vc = vec(c);
      AffineRow re, im;
      add_re(re, v, f, vc, fct);
      add_im(im, v, f, vc, fct);
      rows.push_back(std::move(re));
      rows.push_back(std::move(im));
    }
    if (p.noise.ris2 > 0.0) {
      for (int e = 0; e < m; ++e) {
        if (v.re[f][e] < 0) continue;
        const double a = fct * std::sqrt(p.noise.ris2) * std::abs(ch.g[k][e]);
        rows.push_back(AffineRow{}.add(v.re[f][e], a));
        rows.push_back(AffineRow{}.add(v.im[f][e], a));
      }
    }
    if (lin_out) lin_out->push_back(lin_val * nu + nu);
    if (quad_out) quad_out->push_back(std::norm(beta));
    b.add_rotated_soc(std::move(rows), "qos_" + std::to_string(k));
  }
}

}  // namespace

RisSocp build_ris_socp(const RisProblem& p, const FpAuxiliaries& aux, const RisConfiguration& expansion) {
  const ChannelSet& ch = *p.ch;
  const int m = ch.m_elems;
  const int k_users = ch.n_users();
  RisSocp out;
  ConicBuilder b;
  const SurfaceVars sv = add_surface_variables(b, p);
  const VarMap& v = sv.v;
  out.n_coeff = sv.n_coeff;
  out.n_aux = sv.n_aux;
  const int t = b.add_variables(1);
  const std::array<CVec, 2> phi_bar{expansion.theta_r, expansion.theta_t};

  // objective
  const double current = ris_objective(p, expansion);
  out.obj_scale = 1.0 / std::max(current, 1e-6);
  std::vector<AffineRow> quad;
  quad.push_back(AffineRow{}.add(t, 1.0));
  quad.push_back(AffineRow{{}, 0.5});
  for (size_t i = 0; i < p.spaces.size(); ++i) {
    const SpaceTerms s = space_terms(p, p.spaces[i]);
    const int f = index_of(s.d);
    const double cd = aux.lambda[i].squaredNorm() + aux.eta[i].squaredNorm();
    AffineRow lin;
    double c_const = 0.0;
    for (int c = 0; c < static_cast<int>(s.hx.size()); ++c) {
      const cplx lam = c < k_users ? aux.lambda[i][c] : aux.eta[i][c - k_users];
      CVec coef;
      cplx c0;
      echo_linearisation(p, s, s.hx[c], phi_bar[f], coef, c0);
      // 2 Re{conj(lam) c^T phi} = 2 Re{(lam conj(c))^H phi}
      add_re(lin, v, f, lam * coef.conjugate(), 2.0);
      c_const += 2.0 * (std::conj(lam) * c0).real();
    }
    for (const auto& [j, coef] : lin.terms) b.add_objective(j, -out.obj_scale * coef);
    b.add_objective_offset(-out.obj_scale * (c_const - cd * s.fixed));
    const double w = std::sqrt(cd * p.noise.ris2);
    if (w > 0.0) {
      for (int e = 0; e < m; ++e) {
        if (v.re[f][e] < 0) continue;
        const double a = w * std::abs(s.q[e]);
        quad.push_back(AffineRow{}.add(v.re[f][e], a));
        quad.push_back(AffineRow{}.add(v.im[f][e], a));
      }
    }
  }
  b.add_objective(t, out.obj_scale);
  b.add_rotated_soc(std::move(quad), "noise");

  add_amplitude_constraints(b, p, sv, phi_bar);
  const CMat HX = ch.H * p.tx.beams();
  if (p.limits.check_ris_power) add_surface_power(b, p, v, HX, p.limits.p_ris * (1.0 - kMargin));
  add_rate_rows(b, p, v, HX, phi_bar, -1, &out.qos_linear_at_expansion, &out.qos_quadratic_at_expansion);

  out.program = std::move(b).build();
  return out;
}

std::optional<MarginStep> qos_margin_step(const RisProblem& p, const RisConfiguration& expansion,
                                          const SolverOptions& opts) {
  const ChannelSet& ch = *p.ch;
  ConicBuilder b;
  const SurfaceVars sv = add_surface_variables(b, p);
  const int s = b.add_variables(1);
  const std::array<CVec, 2> phi_bar{expansion.theta_r, expansion.theta_t};
  b.set_objective(s, -1.0);
  b.add_nonneg(AffineRow{{}, kMarginCap}.add(s, -1.0), "margin_cap");
  add_amplitude_constraints(b, p, sv, phi_bar);
  const CMat HX = ch.H * p.tx.beams();
  if (p.limits.check_ris_power) {
    double cap = p.limits.p_ris * (1.0 - kMargin);
    // the split active surface cannot shrink to zero, keep its start feasible
    if (p.protocol == Protocol::kActive)
      cap = std::max(cap, 1.000001 * amplification_power(expansion, p.tx, ch.H, p.noise.ris2));
    add_surface_power(b, p, sv.v, HX, cap);
  }
  add_rate_rows(b, p, sv.v, HX, phi_bar, s, nullptr, nullptr);
  const ConicSolution sol = solve(std::move(b).build(), opts);
  if (!usable(sol)) return std::nullopt;
  RisSocp dummy;
  MarginStep out;
  out.ris = project_amplitudes(p, extract_ris(p, dummy, sol.x));
  out.margin = sol.x[s];
  return out;
}

RisConfiguration extract_ris(const RisProblem& p, const RisSocp&, const RVec& x) {
  const int m = p.ch->m_elems;
  RisConfiguration r;
  r.protocol = p.protocol;
  r.mode_mask = p.mode_mask;
  r.tau_r = p.tau_r;
  r.tau_t = p.tau_t;
  r.theta_r = CVec::Zero(m);
  r.theta_t = CVec::Zero(m);
  int j = 0;
  for (int f = 0; f < 2; ++f) {
    CVec& th = f == 0 ? r.theta_r : r.theta_t;
    for (int e = 0; e < m; ++e) {
      if (!p.allowed[f][e]) continue;
      th[e] = cplx(x[j], x[j + 1]);
      j += 2;
    }
  }
  return r;
}

RisConfiguration project_amplitudes(const RisProblem& p, const RisConfiguration& ris) {
  RisConfiguration r = ris;
  const int m = r.size();
  if (p.protocol == Protocol::kPassive) {
    for (int f = 0; f < 2; ++f) {
      CVec& th = f == 0 ? r.theta_r : r.theta_t;
      for (int e = 0; e < m; ++e) {
        if (!p.allowed[f][e]) continue;
        const double a = std::abs(th[e]);
        th[e] = a > 0.0 ? th[e] / a : cplx(1.0, 0.0);
      }
    }
  } else if (p.protocol == Protocol::kSTAR) {
    for (int e = 0; e < m; ++e) {
      const double s = std::sqrt(std::norm(r.theta_r[e]) + std::norm(r.theta_t[e]));
      if (s > 0.0) {
        r.theta_r[e] /= s;
        r.theta_t[e] /= s;
      } else {
        r.theta_r[e] = r.theta_t[e] = cplx(std::sqrt(0.5), 0.0);
      }
    }
  }
  return r;
}

RisResult solve_ris(const RisProblem& p, const RisConfiguration& start, const ScaOptions& opts) {
  using clock = std::chrono::steady_clock;
  RisResult res;
  res.ris = start;
  res.objective = ris_objective(p, start);
  const bool exact_step = senses_on_surface(p.protocol);
  for (int it = 1; it <= opts.max_iters; ++it) {
    const auto t0 = clock::now();
    ScaStep step;
    step.iter = it;
    const TxProblem tp = make_tx_problem(*p.ch, res.ris, p.filters, p.noise, p.limits, p.spaces);
    const FpAuxiliaries aux = update_auxiliaries(tp, p.tx);
    const RisSocp socp = build_ris_socp(p, aux, res.ris);
    for (size_t i = 0; i < socp.qos_linear_at_expansion.size(); ++i) {
      const double q = socp.qos_quadratic_at_expansion[i];
      step.tangency_gap = std::max(step.tangency_gap,
                                   std::abs(socp.qos_linear_at_expansion[i] - q) / std::max(q, 1e-300));
    }
    const ConicSolution sol = solve(socp.program, opts.solver);
    step.status = sol.status;
    step.solver_iterations = sol.iterations;
    auto finish = [&](double obj) {
      step.objective = obj;
      step.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
      res.steps.push_back(step);
    };
    if (!usable(sol)) {
      ++res.failures;
      res.note = "surface SOCP returned " + to_string(sol.status);
      finish(res.objective);
      break;
    }
    step.surrogate = -sol.objective / socp.obj_scale;
    const RisConfiguration target = extract_ris(p, socp, sol.x);
    // full step first; the four-hop surfaces backtrack along the segment
    bool accepted = false;
    double step_len = 1.0;
    const int tries = exact_step ? 1 : 12;
    for (int bt = 0; bt < tries && !accepted; ++bt, step_len *= 0.5) {
      RisConfiguration cand = target;
      cand.theta_r = res.ris.theta_r + step_len * (target.theta_r - res.ris.theta_r);
      cand.theta_t = res.ris.theta_t + step_len * (target.theta_t - res.ris.theta_t);
      cand = project_amplitudes(p, cand);
      if (!ris_feasible(p, cand)) continue;
      const double obj = ris_objective(p, cand);
      if (obj >= res.objective) {
        const double prev = res.objective;
        res.ris = cand;
        res.objective = obj;
        accepted = true;
        step.accepted = true;
        finish(obj);
        if (opts.converged(prev, obj)) res.converged = true;
      }
    }
    if (!accepted) {
      finish(res.objective);
      res.converged = true;
    }
    if (res.converged) break;
  }
  return res;
}

}  // namespace mfris
