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

#include "mfris/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>
#include <sstream>

#include "mfris/echo.hpp"
#include "mfris/ris_model.hpp"

namespace mfris {

namespace {

const std::vector<Space> kBoth{Space::kReflect, Space::kRefract};

AoOptions fixed_surface(AoOptions o) {
  o.optimize_ris = false;
  o.feasibility_phase = false;
  return o;
}

}  // namespace

SolutionRecord random_baseline(const ChannelSet& ch, const ScenarioConfig& cfg, const AoOptions& opts,
                               int max_draws) {
  const NoiseLevels noise = noise_levels(cfg);
  const Limits limits = limits_from(cfg, ch.n_users());
  Rng rng(mix_seed(opts.seed, 0x4a4d));
  const AoOptions fixed = fixed_surface(opts);
  RisConfiguration last;
  for (int i = 0; i < std::max(1, max_draws); ++i) {
    last = random_feasible(Protocol::kES, ch.m_elems, cfg.beta_max, rng);
    try {
      SolutionRecord rec = ao_from(ch, last, noise, limits, kBoth, fixed);
      rec.scheme = "RANDOM";
      rec.notes.push_back("random draw " + std::to_string(i + 1));
      return rec;
    } catch (const InfeasibleError&) {
    }
  }
  // no draw supports the rates: move the last one just far enough
  AoOptions repair = fixed;
  repair.feasibility_phase = true;
  SolutionRecord rec = ao_from(ch, last, noise, limits, kBoth, repair);
  rec.scheme = "RANDOM";
  rec.notes.push_back("no rate-feasible draw in " + std::to_string(max_draws) + "; last draw repaired");
  return rec;
}

namespace {

// max over m of |m^H E x|^2 / m^H (L x x^H L^H + Nc) m
double best_filter_sinr(const EchoModel& e, const CVec& x) {
  const CVec s = e.E * x;
  if (s.squaredNorm() == 0.0) return 0.0;
  const CVec l = e.L * x;
  CMat Q = l * l.adjoint() + e.Nc;
  return (s.adjoint() * Q.ldlt().solve(s))(0, 0).real();
}

// Dominant right direction of Nc^{-1/2} E.
CVec dominant_direction(const EchoModel& e) {
  const CMat A = e.E.adjoint() * e.Nc.ldlt().solve(e.E);
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (A + A.adjoint()));
  return es.eigenvectors().col(A.rows() - 1);
}

}  // namespace

SolutionRecord exhaustive_baseline(const ChannelSet& ch, const ScenarioConfig& cfg, const AoOptions& opts,
                                   const ExhaustiveOptions& ex, ExhaustiveStats* stats) {
  if (ex.phase_steps < 1 || ex.amp_steps < 2) throw ConfigError("exhaustive: need >= 1 phase and >= 2 amplitude steps");
  const int m = ch.m_elems;
  const long long radix = static_cast<long long>(ex.phase_steps) * ex.amp_steps;
  const double grid = std::pow(static_cast<double>(radix), 2.0 * m);
  if (grid > ex.grid_limit) {
    std::ostringstream os;
    os << "exhaustive: grid of " << grid << " points exceeds the limit " << ex.grid_limit;
    throw ConfigError(os.str());
  }
  ExhaustiveStats st;
  st.grid_size = grid;

  const NoiseLevels noise = noise_levels(cfg);
  const Limits limits = limits_from(cfg, ch.n_users());
  bool used[2];
  for (Space d : kSpaces)
    used[index_of(d)] = !ch.users_in(d).empty() || ch.targets[index_of(d)].alpha.size() > 0;

  // power levels beta_max i / (amp_steps - 1), amplitudes their square roots
  std::vector<double> amp(ex.amp_steps);
  for (int i = 0; i < ex.amp_steps; ++i) amp[i] = std::sqrt(cfg.beta_max * i / (ex.amp_steps - 1));
  std::vector<cplx> rot(ex.phase_steps);
  for (int p = 0; p < ex.phase_steps; ++p) rot[p] = std::polar(1.0, 2.0 * kPi * p / ex.phase_steps);

  // digit layout: face-major, element-minor, each digit = amp * phases + phase
  const int n_digits = 2 * m;
  std::vector<int> digit(n_digits, 0);
  auto amp_of = [&](int k) { return digit[k] / ex.phase_steps; };
  auto phase_of = [&](int k) { return digit[k] % ex.phase_steps; };

  // A global phase on one face changes no SINR, so the first active element
  // of each face is pinned to phase zero; zero amplitudes carry phase zero.
  auto admissible = [&]() {
    for (int f = 0; f < 2; ++f) {
      bool seen = false;
      for (int e = 0; e < m; ++e) {
        const int k = f * m + e;
        const int a = amp_of(k), p = phase_of(k);
        if (!used[f] && a > 0) return false;
        if (a == 0 && p > 0) return false;
        if (a > 0 && !seen) {
          if (p > 0) return false;
          seen = true;
        }
      }
    }
    for (int e = 0; e < m; ++e)
      if (amp_of(e) + amp_of(m + e) > ex.amp_steps - 1) return false;
    return true;
  };

  auto config_of = [&](const std::vector<int>& dg) {
    RisConfiguration r;
    r.protocol = Protocol::kES;
    r.theta_r = CVec::Zero(m);
    r.theta_t = CVec::Zero(m);
    for (int f = 0; f < 2; ++f)
      for (int e = 0; e < m; ++e) {
        const int k = f * m + e;
        (f == 0 ? r.theta_r : r.theta_t)[e] = amp[dg[k] / ex.phase_steps] * rot[dg[k] % ex.phase_steps];
      }
    return r;
  };

  // screening: single full-power beam, no rate constraints
  auto proxy = [&](const RisConfiguration& r) -> std::optional<double> {
    if (limits.check_ris_power &&
        noise.ris2 * (r.theta_r.squaredNorm() + r.theta_t.squaredNorm()) > limits.p_ris)
      return std::nullopt;
    for (int k = 0; k < ch.n_users(); ++k) {
      if (k >= static_cast<int>(limits.min_sinr.size()) || limits.min_sinr[k] <= 0.0) continue;
      const CVec row = ch.g[k].conjugate().cwiseProduct(r.theta(ch.user_space[k]));
      const double gain = (row.transpose() * ch.H).squaredNorm();
      const double best = limits.p_bs * gain / (noise.ris2 * row.squaredNorm() + noise.user2);
      if (best < limits.min_sinr[k]) return std::nullopt;
    }
    const EchoModel er = echo_model(Space::kReflect, ch, r, noise);
    const EchoModel et = echo_model(Space::kRefract, ch, r, noise);
    std::vector<CVec> dirs{dominant_direction(er), dominant_direction(et)};
    dirs.push_back(dirs[0] + dirs[1]);
    double best = 0.0;
    for (CVec x : dirs) {
      if (x.norm() == 0.0) continue;
      x *= std::sqrt(limits.p_bs) / x.norm();
      best = std::max(best, best_filter_sinr(er, x) + best_filter_sinr(et, x));
    }
    return best;
  };

  using Entry = std::pair<double, std::vector<int>>;
  auto worse = [](const Entry& a, const Entry& b) { return a.first > b.first; };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> top(worse);
  const long long total = static_cast<long long>(grid);
  for (long long idx = 0; idx < total; ++idx) {
    long long rem = idx;
    for (int k = 0; k < n_digits; ++k) {
      digit[k] = static_cast<int>(rem % radix);
      rem /= radix;
    }
    ++st.enumerated;
    if (!admissible()) continue;
    ++st.candidates;
    const auto score = proxy(config_of(digit));
    if (!score) continue;
    ++st.rate_possible;
    if (static_cast<int>(top.size()) < ex.refine) {
      top.emplace(*score, digit);
    } else if (*score > top.top().first) {
      top.pop();
      top.emplace(*score, digit);
    }
  }

  AoOptions fixed = fixed_surface(opts);
  fixed.max_iters = ex.refine_ao_iters;
  std::optional<SolutionRecord> best;
  while (!top.empty()) {
    const RisConfiguration r = config_of(top.top().second);
    top.pop();
    ++st.refined;
    try {
      SolutionRecord rec = ao_from(ch, r, noise, limits, kBoth, fixed);
      if (!rec.feasible) continue;
      ++st.refined_feasible;
      if (!best || rec.objective > best->objective) best = std::move(rec);
    } catch (const InfeasibleError&) {
    }
  }
  if (stats) *stats = st;
  if (!best) throw InfeasibleError("exhaustive: no grid point meets the constraints");
  best->scheme = "EXHAUSTIVE";
  std::ostringstream os;
  os << "grid " << st.grid_size << ", distinct " << st.candidates << ", rate-possible " << st.rate_possible
     << ", refined " << st.refined << " (" << st.refined_feasible << " feasible)";
  best->notes.push_back(os.str());
  return *best;
}

SolutionRecord sdr_baseline(const ChannelSet&, const ScenarioConfig&, const AoOptions&) {
  throw BackendUnavailableError("SDR baseline needs a semidefinite solver, which this build does not include");
}

SolutionRecord fixed_architecture_baseline(Protocol kind, const ChannelSet& ch, const ScenarioConfig& cfg,
                                           const AoOptions& opts) {
  if (kind != Protocol::kSTAR && kind != Protocol::kActive && kind != Protocol::kPassive)
    throw ConfigError("fixed architecture must be STAR, ACTIVE or PASSIVE");
  ScenarioConfig c = cfg;
  c.protocol = kind;
  if (ch.m_elems != surface_elements(c))
    throw ConfigError("channels have " + std::to_string(ch.m_elems) + " elements, " + to_string(kind) +
                      " needs " + std::to_string(surface_elements(c)));
  SolutionRecord rec = alternating_optimize(ch, c, opts);
  rec.scheme = to_string(kind);
  rec.notes.push_back("echo returned to the BS over the reciprocal surface link");
  return rec;
}

}  // namespace mfris
