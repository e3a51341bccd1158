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

#include "mfris/ao.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "lifting.hpp"
#include "mfris/filter_design.hpp"
#include "mfris/ris_model.hpp"

namespace mfris {

AoOptions ao_options_from(const ScenarioConfig& cfg) {
  AoOptions o;
  o.tx_sca.max_iters = cfg.max_sca_iters;
  o.tx_sca.tol = cfg.sca_tol;
  // the interior-point floor on these subproblems sits near 1e-8; steps are
  // accepted on the true objective, so the gap tolerance only limits effort
  o.tx_sca.solver.feas_tol = std::max(cfg.solver_tol, 1e-8);
  o.tx_sca.solver.abs_tol = std::max(cfg.solver_tol, 1e-7);
  o.tx_sca.solver.rel_tol = std::max(cfg.solver_tol, 1e-7);
  o.tx_sca.relative_tol = cfg.relative_tol;
  o.ris_sca = o.tx_sca;
  o.relative_tol = cfg.relative_tol;
  o.amplitude_form = cfg.amplitude_form == "modulus_sum" ? AmplitudeForm::kModulusSum : AmplitudeForm::kPower;
  o.tol = cfg.ao_tol;
  o.max_iters = cfg.max_ao_iters;
  o.restarts = cfg.restarts;
  o.audit_tol = 10.0 * cfg.solver_tol;
  o.seed = cfg.seed;
  return o;
}

RisConfiguration initial_ris(const ChannelSet& ch, Protocol protocol, double beta_max,
                             const std::vector<int>& mode_mask, Steering steering) {
  const int m = ch.m_elems;
  RisConfiguration r;
  r.protocol = protocol;
  r.theta_r = CVec::Zero(m);
  r.theta_t = CVec::Zero(m);
  if (protocol == Protocol::kTS) {
    r.tau_r = 0.5;
    r.tau_t = 0.5;
  }
  r.mode_mask = mode_mask;
  if (r.mode_mask.empty() && (protocol == Protocol::kActive || protocol == Protocol::kPassive))
    r.mode_mask = split_group_mask(m);
  if (protocol == Protocol::kMS && r.mode_mask.empty())
    throw ConfigError("mode switching needs an element mask");

  // dominant base-station beam seen by the surface
  Eigen::SelfAdjointEigenSolver<CMat> es(ch.H.adjoint() * ch.H);
  const CVec hbar = ch.H * es.eigenvectors().col(ch.n_tx - 1);

  double amp = 0.0;
  switch (protocol) {
    case Protocol::kES: amp = std::sqrt(beta_max / 2.0); break;
    case Protocol::kMS:
    case Protocol::kTS:
    case Protocol::kActive: amp = std::sqrt(beta_max); break;
    case Protocol::kSTAR: amp = std::sqrt(0.5); break;
    case Protocol::kPassive: amp = 1.0; break;
  }
  auto unit = [](const CVec& v) { return CVec(v.unaryExpr([](cplx z) { return std::polar(1.0, std::arg(z)); })); };
  for (Space d : kSpaces) {
    const auto& tg = ch.targets[index_of(d)];
    CVec target = CVec::Ones(m);
    if (tg.alpha.size() > 0) {
      Eigen::Index j = 0;
      tg.alpha.cwiseAbs().maxCoeff(&j);
      target = tg.B.col(j);
    }
    CVec dir = target;
    const std::vector<int> users = ch.users_in(d);
    if (steering == Steering::kMixed) {
      dir = unit(target);
      for (int k : users) dir += unit(ch.g[k]);
    } else if (steering == Steering::kWeakestUser && !users.empty()) {
      int weakest = users.front();
      double least = std::numeric_limits<double>::infinity();
      for (int k : users) {
        const double gain = ch.g[k].cwiseAbs().dot(hbar.cwiseAbs());
        if (gain < least) {
          least = gain;
          weakest = k;
        }
      }
      dir = ch.g[weakest];
    }
    CVec& th = r.theta(d);
    for (int e = 0; e < m; ++e) {
      if (!r.mode_mask.empty() && r.mode_mask[e] != index_of(d)) continue;
      th[e] = std::polar(amp, std::arg(dir[e]) - std::arg(hbar[e]));
    }
  }
  return r;
}

std::vector<int> dominant_face_mask(const RisConfiguration& ris) {
  std::vector<int> mask(ris.size());
  for (int e = 0; e < ris.size(); ++e) mask[e] = std::norm(ris.theta_r[e]) >= std::norm(ris.theta_t[e]) ? 0 : 1;
  return mask;
}

std::vector<int> mode_switch_mask(const ChannelSet& ch, const RisConfiguration& es, int min_count) {
  const int m = es.size();
  double e_r = 0.0, e_t = 0.0;
  std::vector<std::pair<double, int>> share(m);
  for (int e = 0; e < m; ++e) {
    const double pr = std::norm(es.theta_r[e]), pt = std::norm(es.theta_t[e]);
    e_r += pr;
    e_t += pt;
    share[e] = {pr + pt > 0.0 ? pt / (pr + pt) : 0.0, e};
  }
  auto serves = [&](Space d) {
    return !ch.users_in(d).empty() || ch.targets[index_of(d)].alpha.size() > 0;
  };
  const int lo = serves(Space::kRefract) ? std::min(min_count, m) : 0;
  const int hi = serves(Space::kReflect) ? std::max(m - min_count, 0) : m;
  const double total = e_r + e_t;
  int n_t = total > 0.0 ? static_cast<int>(std::lround(m * e_t / total)) : m / 2;
  n_t = std::clamp(n_t, lo, std::max(lo, hi));
  std::stable_sort(share.begin(), share.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<int> mask(m, 0);
  for (int i = 0; i < n_t; ++i) mask[share[i].second] = 1;
  return mask;
}

RisConfiguration round_to_mask(const RisConfiguration& es, const std::vector<int>& mask) {
  RisConfiguration r = es;
  r.protocol = Protocol::kMS;
  r.mode_mask = mask;
  for (int e = 0; e < r.size(); ++e) {
    const double amp = std::sqrt(std::norm(es.theta_r[e]) + std::norm(es.theta_t[e]));
    CVec& keep = mask[e] == 0 ? r.theta_r : r.theta_t;
    CVec& drop = mask[e] == 0 ? r.theta_t : r.theta_r;
    const double phase = std::abs(keep[e]) > 0.0 ? std::arg(keep[e]) : std::arg(drop[e]);
    keep[e] = std::polar(amp, phase);
    drop[e] = 0.0;
  }
  return r;
}

std::vector<RisConfiguration> start_candidates(const ChannelSet& ch, Protocol protocol, double beta_max,
                                               const std::vector<int>& mode_mask, int n_random,
                                               std::uint64_t seed) {
  std::vector<RisConfiguration> out;
  for (Steering s : {Steering::kTarget, Steering::kMixed, Steering::kWeakestUser})
    out.push_back(initial_ris(ch, protocol, beta_max, mode_mask, s));
  Rng rng(mix_seed(seed, 0x5eed));
  for (int i = 0; i < n_random; ++i) {
    RisConfiguration r = out.front();
    for (Space d : kSpaces) {
      CVec& th = r.theta(d);
      for (Eigen::Index e = 0; e < th.size(); ++e)
        if (std::abs(th[e]) > 0.0) th[e] = std::polar(std::abs(th[e]), rng.phase());
    }
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point t0) {
  return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

struct Evaluator {
  const ChannelSet& ch;
  const NoiseLevels& noise;
  const Limits& limits;
  const std::vector<Space>& spaces;

  TxProblem problem(const RisConfiguration& ris, const SensingFilters& f) const {
    return make_tx_problem(ch, ris, f, noise, limits, spaces);
  }
  double objective(const RisConfiguration& ris, const TransmitDesign& tx, const SensingFilters& f) const {
    return tx_objective(problem(ris, f), tx);
  }
  bool feasible(const RisConfiguration& ris, const TransmitDesign& tx, const SensingFilters& f) const {
    return tx_violation(problem(ris, f), tx) <= 1e-6 && validate(ris, limits.beta_max).empty();
  }
};

SensingFilters placeholder_filters(const ChannelSet& ch, Protocol p, double p_sense) {
  const int dim = senses_on_surface(p) ? ch.m_sense : ch.n_tx;
  SensingFilters f;
  for (Space d : kSpaces) {
    f[d] = CVec::Zero(dim);
    f[d][0] = std::sqrt(p_sense);
  }
  return f;
}

}  // namespace

RisConfiguration restore_feasibility(const ChannelSet& ch, const RisConfiguration& start,
                                     const NoiseLevels& noise, const Limits& limits,
                                     const std::vector<Space>& spaces, const AoOptions& opts,
                                     int* rounds) {
  const SensingFilters filters = placeholder_filters(ch, start.protocol, limits.p_sense);
  RisConfiguration ris = start;
  double best_scale = std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int r = 0; r < kFeasibilityRounds; ++r) {
    if (rounds) *rounds = r + 1;
    const TxProblem tp = make_tx_problem(ch, ris, filters, noise, limits, spaces);
    const auto sb = budget_scaled_beams(tp, opts.tx_sca.solver);
    if (!sb) throw InfeasibleError("feasibility phase: beam step failed");
    if (sb->scale <= 1.0 - 4.0 * detail::kMargin) return ris;
    if (sb->scale < best_scale * (1.0 - 1e-3)) {
      best_scale = sb->scale;
      stale = 0;
    } else if (++stale >= 3) {
      break;
    }
    TransmitDesign tx = TransmitDesign::zeros(ch.n_tx, ch.n_users());
    tx.W = sb->W / std::sqrt(sb->scale);
    RisProblem rp = make_ris_problem(ch, ris, tx, filters, noise, limits, spaces);
    rp.form = opts.amplitude_form;
    const auto step = qos_margin_step(rp, ris, opts.ris_sca.solver);
    if (!step) throw InfeasibleError("feasibility phase: surface step failed");
    ris = step->ris;
  }
  throw InfeasibleError("feasibility phase: budgets still exceeded by a factor " + std::to_string(best_scale));
}

SolutionRecord ao_from(const ChannelSet& ch, const RisConfiguration& start, const NoiseLevels& noise,
                       const Limits& limits, const std::vector<Space>& spaces, const AoOptions& opts) {
  const Evaluator ev{ch, noise, limits, spaces};
  SolutionRecord rec;
  rec.protocol = start.protocol;
  rec.scheme = to_string(start.protocol);
  RisConfiguration ris = start;
  SensingFilters filters = placeholder_filters(ch, start.protocol, limits.p_sense);

  auto t0 = clock_type::now();
  TransmitDesign tx;
  try {
    tx = initial_tx(ev.problem(ris, filters), opts.tx_sca.solver);
  } catch (const InfeasibleError&) {
    if (!opts.feasibility_phase) throw;
    int rounds = 0;
    ris = restore_feasibility(ch, ris, noise, limits, spaces, opts, &rounds);
    rec.notes.push_back("feasibility phase: " + std::to_string(rounds) + " rounds");
    tx = initial_tx(ev.problem(ris, filters), opts.tx_sca.solver);
  }
  for (Space d : spaces) {
    const RayleighResult r = optimal_filter(d, ch, ris, tx, noise, limits.p_sense);
    filters[d] = r.v;
    filters.degenerate[index_of(d)] = r.degenerate;
  }
  double obj = ev.objective(ris, tx, filters);
  rec.trace.push_back({0, "init", obj, ev.feasible(ris, tx, filters), ms_since(t0), 0, 0.0});

  auto audit = [&](double before, double after) {
    const double drop = (before - after) / std::max(std::abs(before), 1e-300);
    rec.worst_drop = std::max(rec.worst_drop, drop);
    if (drop > opts.audit_tol) rec.monotone = false;
  };

  double prev_outer = obj;
  for (int it = 1; it <= opts.max_iters; ++it) {
    rec.iterations = it;
    // filters
    t0 = clock_type::now();
    for (Space d : spaces) {
      const RayleighResult r = optimal_filter(d, ch, ris, tx, noise, limits.p_sense);
      filters[d] = r.v;
      filters.degenerate[index_of(d)] = r.degenerate;
    }
    double next = ev.objective(ris, tx, filters);
    double ms = ms_since(t0);
    rec.filter_ms += ms;
    audit(obj, next);
    obj = next;
    rec.trace.push_back({it, "filter", obj, ev.feasible(ris, tx, filters), ms, 0, 0.0});

    // transmit beams
    t0 = clock_type::now();
    bool halted = false;
    try {
      const TxResult tr = solve_tx(ev.problem(ris, filters), tx, opts.tx_sca);
      tx = tr.tx;
      double gap = 0.0;
      for (const auto& s : tr.steps) gap = std::max(gap, s.tangency_gap);
      rec.max_tangency_gap = std::max(rec.max_tangency_gap, gap);
      ms = ms_since(t0);
      rec.tx_ms += ms;
      next = ev.objective(ris, tx, filters);
      audit(obj, next);
      obj = next;
      rec.trace.push_back({it, "tx", obj, ev.feasible(ris, tx, filters), ms,
                           static_cast<int>(tr.steps.size()), gap});
      if (tr.failures > 0) rec.notes.push_back("iteration " + std::to_string(it) + ": " + tr.note);
    } catch (const std::exception& e) {
      rec.notes.push_back("iteration " + std::to_string(it) + ": transmit block failed: " + e.what());
      halted = true;
    }

    // surface
    if (!halted && opts.optimize_ris) {
      t0 = clock_type::now();
      try {
        RisProblem rp = make_ris_problem(ch, ris, tx, filters, noise, limits, spaces);
        rp.form = opts.amplitude_form;
        const RisResult rr = solve_ris(rp, ris, opts.ris_sca);
        ris = rr.ris;
        double gap = 0.0;
        for (const auto& s : rr.steps) gap = std::max(gap, s.tangency_gap);
        rec.max_tangency_gap = std::max(rec.max_tangency_gap, gap);
        ms = ms_since(t0);
        rec.ris_ms += ms;
        next = ev.objective(ris, tx, filters);
        audit(obj, next);
        obj = next;
        rec.trace.push_back({it, "ris", obj, ev.feasible(ris, tx, filters), ms,
                             static_cast<int>(rr.steps.size()), gap});
        if (rr.failures > 0) rec.notes.push_back("iteration " + std::to_string(it) + ": " + rr.note);
      } catch (const std::exception& e) {
        rec.notes.push_back("iteration " + std::to_string(it) + ": surface block failed: " + e.what());
        halted = true;
      }
    }
    rec.outer_objective.push_back(obj);
    if (halted) break;
    if (std::abs(obj - prev_outer) <= opts.tol * (opts.relative_tol ? std::max(std::abs(obj), 1e-300) : 1.0)) {
      rec.converged = true;
      break;
    }
    prev_outer = obj;
  }

  rec.tx = tx;
  rec.ris = ris;
  rec.filters = filters;
  rec.objective = obj;
  rec.report = evaluate(ch, ris, tx, filters, noise, limits);
  rec.user_rates = rec.report.user_rate;
  rec.feasible = rec.report.feasible();
  return rec;
}

namespace {

// Runs the AO from the candidates in order until opts.restarts runs have a
// feasible starting point; keeps the best.
SolutionRecord best_of_restarts(const ChannelSet& ch, const std::vector<RisConfiguration>& candidates,
                                const NoiseLevels& noise, const Limits& limits,
                                const std::vector<Space>& spaces, const AoOptions& opts) {
  std::optional<SolutionRecord> best;
  std::string last_error = "no starting point";
  int runs = 0;
  for (const RisConfiguration& s : candidates) {
    if (runs >= std::max(1, opts.restarts)) break;
    try {
      SolutionRecord rec = ao_from(ch, s, noise, limits, spaces, opts);
      ++runs;
      if (!best || (rec.feasible && (!best->feasible || rec.objective > best->objective))) best = std::move(rec);
    } catch (const InfeasibleError& e) {
      last_error = e.what();
    }
  }
  if (!best) throw InfeasibleError(last_error);
  return *best;
}

constexpr int kRandomStarts = 8;

double ts_threshold(double r_th, double tau) {
  if (!(tau > 0.0)) return std::numeric_limits<double>::infinity();
  return std::exp2(r_th / tau) - 1.0;
}

struct TsPhase {
  bool ok = false;
  SolutionRecord rec;
};

SolutionRecord time_switching(const ChannelSet& ch, const ScenarioConfig& cfg, const AoOptions& opts) {
  const NoiseLevels noise = noise_levels(cfg);
  const Limits base = limits_from(cfg, ch.n_users());
  const std::vector<RisConfiguration> seeds =
      start_candidates(ch, Protocol::kTS, cfg.beta_max, {}, kRandomStarts, opts.seed);
  std::map<std::pair<int, long long>, TsPhase> cache;

  auto phase = [&](Space d, double tau) -> const TsPhase& {
    const auto key = std::make_pair(index_of(d), std::llround(tau * 1e9));
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    TsPhase ph;
    Limits lim = base;
    bool possible = true;
    for (int k = 0; k < ch.n_users(); ++k) {
      if (ch.user_space[k] == d) {
        lim.min_sinr[k] = ts_threshold(cfg.r_th, tau);
        if (!std::isfinite(lim.min_sinr[k])) possible = false;
      } else {
        lim.min_sinr[k] = -1.0;
      }
    }
    if (possible && tau > 0.0) {
      std::vector<RisConfiguration> starts = seeds;
      for (auto& s : starts) {
        s.theta(other(d)).setZero();
        s.tau_r = d == Space::kReflect ? tau : 1.0 - tau;
        s.tau_t = 1.0 - s.tau_r;
      }
      try {
        ph.rec = best_of_restarts(ch, starts, noise, lim, {d}, opts);
        ph.ok = ph.rec.feasible;
      } catch (const InfeasibleError&) {
        ph.ok = false;
      }
    }
    return cache.emplace(key, std::move(ph)).first->second;
  };
  auto score = [&](double tau_r) {
    const TsPhase& r = phase(Space::kReflect, tau_r);
    const TsPhase& t = phase(Space::kRefract, 1.0 - tau_r);
    if (!r.ok || !t.ok) return -std::numeric_limits<double>::infinity();
    return tau_r * r.rec.objective + (1.0 - tau_r) * t.rec.objective;
  };

  // coarse scan, then golden section around the best scan point
  const std::vector<double> grid{0.1, 0.3, 0.5, 0.7, 0.9};
  double best_tau = grid[0], best = score(grid[0]);
  for (double g : grid) {
    const double v = score(g);
    if (v > best) {
      best = v;
      best_tau = g;
    }
  }
  if (!std::isfinite(best)) throw InfeasibleError("no time split meets the rate constraints");
  double lo = std::max(0.01, best_tau - 0.2), hi = std::min(0.99, best_tau + 0.2);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = score(x1), f2 = score(x2);
  while (hi - lo > opts.ts_tau_tol) {
    if (f1 >= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = score(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = score(x2);
    }
  }
  for (auto [x, f] : {std::pair{x1, f1}, std::pair{x2, f2}})
    if (f > best) {
      best = f;
      best_tau = x;
    }

  const SolutionRecord& pr = phase(Space::kReflect, best_tau).rec;
  const SolutionRecord& pt = phase(Space::kRefract, 1.0 - best_tau).rec;
  SolutionRecord rec;
  rec.scheme = "TS";
  rec.protocol = Protocol::kTS;
  rec.phases = {pr, pt};
  rec.ris = pr.ris;
  rec.ris.theta_t = pt.ris.theta_t;
  rec.ris.tau_r = best_tau;
  rec.ris.tau_t = 1.0 - best_tau;
  rec.tx = pr.tx;
  rec.filters.m[0] = pr.filters.m[0];
  rec.filters.m[1] = pt.filters.m[1];
  rec.objective = best;
  rec.converged = pr.converged && pt.converged;
  rec.monotone = pr.monotone && pt.monotone;
  rec.worst_drop = std::max(pr.worst_drop, pt.worst_drop);
  rec.max_tangency_gap = std::max(pr.max_tangency_gap, pt.max_tangency_gap);
  rec.iterations = std::max(pr.iterations, pt.iterations);
  rec.filter_ms = pr.filter_ms + pt.filter_ms;
  rec.tx_ms = pr.tx_ms + pt.tx_ms;
  rec.ris_ms = pr.ris_ms + pt.ris_ms;
  // time-weighted report
  MetricsReport& rep = rec.report;
  rep.sensing_sinr = {pr.report.sensing_sinr[0], pt.report.sensing_sinr[1]};
  rep.objective = best;
  rep.bs_power = std::max(pr.report.bs_power, pt.report.bs_power);
  rep.ris_power = std::max(pr.report.ris_power, pt.report.ris_power);
  rep.worst_violation = std::max(pr.report.worst_violation, pt.report.worst_violation);
  for (const auto* ph : {&pr, &pt})
    for (const auto& v : ph->report.violations) rep.violations.push_back(v);
  for (int k = 0; k < ch.n_users(); ++k) {
    const bool in_r = ch.user_space[k] == Space::kReflect;
    const SolutionRecord& own = in_r ? pr : pt;
    const double tau = in_r ? best_tau : 1.0 - best_tau;
    rep.user_sinr.push_back(own.report.user_sinr[k]);
    rep.user_rate.push_back(tau * own.report.user_rate[k]);
  }
  rec.user_rates = rep.user_rate;
  const double r_need = cfg.r_th * (1.0 - 1e-6);
  bool rates_ok = true;
  for (double r : rec.user_rates) rates_ok = rates_ok && r >= r_need;
  rec.feasible = rep.violations.empty() && rates_ok && validate(rec.ris, cfg.beta_max).empty();
  for (const auto* ph : {&pr, &pt}) {
    for (const auto& b : ph->trace) {
      BlockTrace bt = b;
      bt.block = std::string(ph == &pr ? "r:" : "t:") + b.block;
      rec.trace.push_back(bt);
    }
    for (const auto& n : ph->notes) rec.notes.push_back(n);
  }
  std::ostringstream os;
  os << "time split tau_r = " << best_tau << " after " << cache.size() << " phase runs";
  rec.notes.push_back(os.str());
  return rec;
}

}  // namespace

SolutionRecord alternating_optimize(const ChannelSet& ch, const ScenarioConfig& cfg, const AoOptions& opts) {
  const NoiseLevels noise = noise_levels(cfg);
  const Limits limits = limits_from(cfg, ch.n_users());
  const std::vector<Space> both{Space::kReflect, Space::kRefract};
  switch (cfg.protocol) {
    case Protocol::kTS:
      return time_switching(ch, cfg, opts);
    case Protocol::kMS: {
      const SolutionRecord es = best_of_restarts(
          ch, start_candidates(ch, Protocol::kES, cfg.beta_max, {}, kRandomStarts, opts.seed), noise, limits,
          both, opts);
      std::optional<SolutionRecord> best;
      std::string err = "no mask tried";
      std::vector<int> last_mask;
      const int m = es.ris.size();
      for (int min_count : {1, m / 8, m / 4, m / 2}) {
        const std::vector<int> mask = mode_switch_mask(ch, es.ris, std::max(1, min_count));
        if (mask == last_mask) continue;
        last_mask = mask;
        try {
          SolutionRecord r = ao_from(ch, round_to_mask(es.ris, mask), noise, limits, both, opts);
          if (!best || (r.feasible && (!best->feasible || r.objective > best->objective))) best = std::move(r);
          if (best->feasible) break;
        } catch (const InfeasibleError& e) {
          err = e.what();
        }
      }
      if (!best || !best->feasible) {
        for (auto& c : start_candidates(ch, Protocol::kMS, cfg.beta_max, last_mask, kRandomStarts, opts.seed)) {
          try {
            SolutionRecord r = ao_from(ch, c, noise, limits, both, opts);
            if (!best || (r.feasible && (!best->feasible || r.objective > best->objective))) best = std::move(r);
            if (best->feasible) break;
          } catch (const InfeasibleError& e) {
            err = e.what();
          }
        }
      }
      if (!best) throw InfeasibleError("mode switching: " + err);
      best->scheme = "MS";
      best->notes.push_back("mask from energy-splitting solution with objective " +
                            std::to_string(es.objective));
      return *best;
    }
    default: {
      SolutionRecord r = best_of_restarts(
          ch, start_candidates(ch, cfg.protocol, cfg.beta_max, {}, kRandomStarts, opts.seed), noise, limits,
          both, opts);
      r.scheme = to_string(cfg.protocol);
      return r;
    }
  }
}

std::string complexity_report(const ScenarioConfig& cfg, const SolutionRecord* rec) {
  const long long k = cfg.n_users(), j = cfg.n_targets(), n = cfg.n_tx, m = cfg.m_elems(),
                  ms = cfg.m_sense();
  const double e1 = cfg.sca_tol, e2 = cfg.sca_tol;
  auto p4 = [](long long x) { return static_cast<double>(x) * x * x * x; };
  std::ostringstream os;
  os << std::setprecision(9);
  os << "K=" << k << " J=" << j << " N=" << n << " M=" << m << " Ms=" << ms << "\n";
  os << "filter: O((J*Ms)^3) = O((" << j << "*" << ms << ")^3) = " << std::pow(double(j * ms), 3) << "\n";
  os << "tx: O((K+J)^4*N^4 + (4K+4J)*N^2*log(1/eps1)) = O(" << p4(k + j) << "*" << p4(n) << " + "
     << 4 * (k + j) << "*" << n * n << "*" << std::log(1.0 / e1) << ") = "
     << p4(k + j) * p4(n) + 4.0 * (k + j) * n * n * std::log(1.0 / e1) << "\n";
  os << "ris: O((K+J)^4*M^4 + (4K+4J)*M^2*log(1/eps2)) = O(" << p4(k + j) << "*" << p4(m) << " + "
     << 4 * (k + j) << "*" << m * m << "*" << std::log(1.0 / e2) << ") = "
     << p4(k + j) * p4(m) + 4.0 * (k + j) * m * m * std::log(1.0 / e2) << "\n";
  if (rec) {
    os << "measured_ms: filter=" << rec->filter_ms << " tx=" << rec->tx_ms << " ris=" << rec->ris_ms << "\n";
    const double socp = rec->tx_ms + rec->ris_ms;
    os << "filter_to_socp_ratio=" << (socp > 0.0 ? rec->filter_ms / socp : 0.0) << "\n";
  }
  return os.str();
}

void write_trace_csv(const SolutionRecord& rec, std::ostream& os, bool timing) {
  os << "iter,block,objective,feasible,wall_ms\n";
  os << std::setprecision(9);
  for (const auto& b : rec.trace)
    os << b.iter << "," << b.block << "," << b.objective << "," << (b.feasible ? 1 : 0) << ","
       << (timing ? b.wall_ms : 0.0) << "\n";
}

}  // namespace mfris
