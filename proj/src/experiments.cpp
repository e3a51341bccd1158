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

#include "mfris/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "mfris/baselines.hpp"

namespace mfris {

Scenario make_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Scenario sc;
  sc.cfg = cfg;
  Rng geo(mix_seed(cfg.seed, 1));
  sc.geom = sample_geometry(cfg, geo);
  Rng chn(mix_seed(cfg.seed, 2));
  sc.ch = build_channels(sc.geom, cfg, chn);
  return sc;
}

const std::vector<std::string>& scheme_names() {
  static const std::vector<std::string> names{"ES",      "MS",     "TS",         "STAR", "ACTIVE",
                                              "PASSIVE", "RANDOM", "EXHAUSTIVE", "SDR"};
  return names;
}

namespace {

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

int scheme_rank(const std::string& s) {
  const auto& n = scheme_names();
  return static_cast<int>(std::find(n.begin(), n.end(), s) - n.begin());
}

}  // namespace

std::string canonical_scheme(const std::string& name) {
  const std::string u = upper(name);
  if (scheme_rank(u) == static_cast<int>(scheme_names().size())) throw ConfigError("unknown scheme: " + name);
  return u;
}

Protocol scheme_protocol(const std::string& scheme) {
  const std::string s = canonical_scheme(scheme);
  if (s == "RANDOM" || s == "EXHAUSTIVE" || s == "SDR") return Protocol::kES;
  return protocol_from_string(s);
}

SolutionRecord run_scheme(const std::string& scheme, const ScenarioConfig& cfg) {
  const std::string s = canonical_scheme(scheme);
  ScenarioConfig c = cfg;
  c.protocol = scheme_protocol(s);
  // the BS budget follows from the total budget for the new protocol
  if (c.protocol != cfg.protocol) c.p_bs_dbm.reset();
  const Scenario sc = make_scenario(c);
  const AoOptions opts = ao_options_from(c);
  if (s == "RANDOM") return random_baseline(sc.ch, c, opts);
  if (s == "EXHAUSTIVE") return exhaustive_baseline(sc.ch, c, opts);
  if (s == "SDR") return sdr_baseline(sc.ch, c, opts);
  if (s == "STAR" || s == "ACTIVE" || s == "PASSIVE")
    return fixed_architecture_baseline(c.protocol, sc.ch, c, opts);
  return alternating_optimize(sc.ch, c, opts);
}

// ---------------------------------------------------------------------------

std::string canonical_axis(const std::string& axis) {
  const std::string u = upper(axis);
  if (u == "M") return "M";
  if (u == "MS" || u == "M_S") return "Ms";
  if (u == "P_TOTAL" || u == "P" || u == "PTOTAL") return "P_total";
  if (u == "R_TH" || u == "RTH") return "R_th";
  throw ConfigError("unknown sweep axis: " + axis);
}

std::vector<double> default_axis_values(const std::string& axis) {
  const std::string a = canonical_axis(axis);
  if (a == "M") return {16, 24, 32, 40, 48};
  if (a == "Ms") return {4, 6, 8, 10, 12};
  if (a == "P_total") return {35, 38, 41, 44, 47, 50};
  return {0.5, 1.0, 1.5, 2.0};
}

ScenarioConfig apply_axis(const ScenarioConfig& cfg, const std::string& axis, double value) {
  const std::string a = canonical_axis(axis);
  ScenarioConfig c = cfg;
  auto whole = [&](double v, int div) {
    const long long n = std::llround(v);
    if (std::abs(v - static_cast<double>(n)) > 1e-9 || n <= 0 || n % div != 0) {
      std::ostringstream os;
      os << "axis " << a << " value " << v << " must be a positive multiple of " << div;
      throw ConfigError(os.str());
    }
    return static_cast<int>(n / div);
  };
  if (a == "M") {
    c.m_z = 4;
    c.m_y = whole(value, 4);
  } else if (a == "Ms") {
    c.m_v = c.m_h = whole(value, 2);
  } else if (a == "P_total") {
    c.p_total_dbm = value;
    c.p_bs_dbm.reset();
  } else {
    c.r_th = value;
  }
  return c;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min(jobs, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

std::vector<SweepCell> run_sweep(const ScenarioConfig& base, const std::string& axis,
                                 const std::vector<double>& values, const std::vector<std::uint64_t>& seeds,
                                 const std::vector<std::string>& schemes, int jobs) {
  const std::string a = canonical_axis(axis);
  if (!std::is_sorted(values.begin(), values.end())) throw ConfigError("sweep values must be ascending");
  std::vector<SweepCell> cells;
  for (const auto& s : schemes)
    for (double v : values)
      for (std::uint64_t seed : seeds) {
        SweepCell c;
        c.scheme = canonical_scheme(s);
        c.axis = a;
        c.value = v;
        c.seed = seed;
        cells.push_back(c);
      }
  // reject bad axis values before any work starts
  for (double v : values) apply_axis(base, a, v).validate();

  parallel_for(static_cast<int>(cells.size()), jobs, [&](int i) {
    SweepCell& c = cells[i];
    const double nan = std::numeric_limits<double>::quiet_NaN();
    try {
      ScenarioConfig cfg = apply_axis(base, a, c.value);
      cfg.seed = c.seed;
      const SolutionRecord rec = run_scheme(c.scheme, cfg);
      c.objective = rec.objective;
      c.objective_db = linear_to_db(rec.objective);
      c.rate_min = rec.user_rates.empty() ? nan : *std::min_element(rec.user_rates.begin(), rec.user_rates.end());
      c.feasible = rec.feasible;
    } catch (const std::exception& e) {
      c.objective = c.objective_db = c.rate_min = nan;
      c.feasible = false;
      c.error = e.what();
    }
  });
  std::stable_sort(cells.begin(), cells.end(), [](const SweepCell& x, const SweepCell& y) {
    const int rx = scheme_rank(x.scheme), ry = scheme_rank(y.scheme);
    if (rx != ry) return rx < ry;
    if (x.value != y.value) return x.value < y.value;
    return x.seed < y.seed;
  });
  return cells;
}

std::vector<SweepSummary> summarize(const std::vector<SweepCell>& cells) {
  std::vector<SweepSummary> out;
  for (size_t i = 0; i < cells.size();) {
    size_t j = i;
    while (j < cells.size() && cells[j].scheme == cells[i].scheme && cells[j].value == cells[i].value) ++j;
    SweepSummary s;
    s.scheme = cells[i].scheme;
    s.value = cells[i].value;
    double sum = 0.0, sum2 = 0.0, rate = 0.0;
    int feas = 0;
    for (size_t k = i; k < j; ++k) {
      if (cells[k].feasible) ++feas;
      if (!std::isfinite(cells[k].objective_db)) continue;
      ++s.count;
      sum += cells[k].objective_db;
      sum2 += cells[k].objective_db * cells[k].objective_db;
      rate += cells[k].rate_min;
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (s.count > 0) {
      s.mean_db = sum / s.count;
      s.std_db = s.count > 1 ? std::sqrt(std::max(0.0, (sum2 - s.count * s.mean_db * s.mean_db) / (s.count - 1)))
                             : 0.0;
      s.mean_rate_min = rate / s.count;
    } else {
      s.mean_db = s.std_db = s.mean_rate_min = nan;
    }
    s.feasible_fraction = static_cast<double>(feas) / static_cast<double>(j - i);
    out.push_back(s);
    i = j;
  }
  return out;
}

void write_sweep_csv(const std::vector<SweepCell>& cells, std::ostream& os) {
  os << "scheme,axis,value,seed,objective_db,rate_min,feasible\n";
  os << std::setprecision(9);
  for (const auto& c : cells)
    os << c.scheme << "," << c.axis << "," << c.value << "," << c.seed << "," << c.objective_db << ","
       << c.rate_min << "," << (c.feasible ? 1 : 0) << "\n";
  const std::string axis = cells.empty() ? "" : cells.front().axis;
  for (const auto& s : summarize(cells)) {
    os << s.scheme << "," << axis << "," << s.value << ",mean," << s.mean_db << "," << s.mean_rate_min << ","
       << s.feasible_fraction << "\n";
    os << s.scheme << "," << axis << "," << s.value << ",std," << s.std_db << ",,\n";
  }
}

// ---------------------------------------------------------------------------

Dims parse_dims(const std::string& text) {
  Dims d;
  char x1 = 0, x2 = 0;
  std::istringstream is(text);
  if (!(is >> d.n_tx >> x1 >> d.m >> x2 >> d.m_s) || x1 != 'x' || x2 != 'x' || !is.eof())
    throw ConfigError("dims must look like NxMxMs, got " + text);
  if (d.n_tx <= 0 || d.m <= 0 || d.m % 4 != 0 || d.m_s <= 0 || d.m_s % 2 != 0)
    throw ConfigError("dims need N > 0, M a positive multiple of 4 and Ms a positive even number");
  return d;
}

ScenarioConfig apply_dims(const ScenarioConfig& cfg, const Dims& d) {
  ScenarioConfig c = apply_axis(apply_axis(cfg, "M", d.m), "Ms", d.m_s);
  c.n_tx = d.n_tx;
  return c;
}

std::vector<ConvergenceRun> run_convergence(const ScenarioConfig& base, const std::vector<Dims>& dims,
                                            const std::vector<std::uint64_t>& seeds, int jobs) {
  std::vector<ConvergenceRun> runs;
  for (const Dims& d : dims) {
    apply_dims(base, d).validate();
    for (std::uint64_t s : seeds) runs.push_back({d, s, {}});
  }
  std::vector<std::string> errors(runs.size());
  parallel_for(static_cast<int>(runs.size()), jobs, [&](int i) {
    ScenarioConfig c = apply_dims(base, runs[i].dims);
    c.seed = runs[i].seed;
    try {
      runs[i].rec = run_scheme(to_string(c.protocol), c);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (size_t i = 0; i < runs.size(); ++i)
    if (!errors[i].empty()) {
      runs[i].rec.feasible = false;
      runs[i].rec.notes.push_back("failed: " + errors[i]);
    }
  return runs;
}

void write_convergence_csv(const std::vector<ConvergenceRun>& runs, std::ostream& os) {
  os << "n_tx,m,m_s,seed,iter,objective,objective_db\n";
  os << std::setprecision(9);
  for (const auto& r : runs) {
    std::vector<double> seq;
    if (!r.rec.trace.empty()) seq.push_back(r.rec.trace.front().objective);
    seq.insert(seq.end(), r.rec.outer_objective.begin(), r.rec.outer_objective.end());
    for (size_t it = 0; it < seq.size(); ++it)
      os << r.dims.n_tx << "," << r.dims.m << "," << r.dims.m_s << "," << r.seed << "," << it << "," << seq[it]
         << "," << linear_to_db(seq[it]) << "\n";
  }
}

// ---------------------------------------------------------------------------

ScenarioConfig four_target_config(const ScenarioConfig& cfg) {
  ScenarioConfig c = cfg;
  c.protocol = Protocol::kES;
  c.targets_r = 2;
  c.targets_t = 2;
  c.targets.clear();
  const double angles[4][2] = {{60, 10}, {-60, 70}, {60, 20}, {-60, 30}};
  for (int i = 0; i < 4; ++i) {
    PlacementSpec p;
    p.space = i < 2 ? Space::kReflect : Space::kRefract;
    p.horizontal_deg = angles[i][0];
    p.vertical_deg = angles[i][1];
    p.distance = 20.0;
    c.targets.push_back(p);
  }
  return c;
}

namespace {

std::vector<double> arange(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw ConfigError("angle grid needs step > 0 and max >= min");
  std::vector<double> v;
  const long long n = std::llround(std::floor((hi - lo) / step + 1e-9));
  for (long long i = 0; i <= n; ++i) v.push_back(lo + static_cast<double>(i) * step);
  return v;
}

}  // namespace

std::vector<double> AngleGrid::horizontal() const { return arange(h_min, h_max, h_step); }
std::vector<double> AngleGrid::vertical() const { return arange(v_min, v_max, v_step); }

BeamPattern solution_beampattern(const Scenario& sc, const SolutionRecord& rec, const AngleGrid& grid) {
  if (rec.phases.size() == 2) {
    // time switching: each face radiates during its own phase
    BeamPattern r = beampattern(rec.phases[0].ris, rec.phases[0].tx, sc.ch.H, sc.cfg.m_y, sc.cfg.m_z,
                                sc.cfg.element_spacing_ratio, grid.horizontal(), grid.vertical());
    const BeamPattern t = beampattern(rec.phases[1].ris, rec.phases[1].tx, sc.ch.H, sc.cfg.m_y, sc.cfg.m_z,
                                      sc.cfg.element_spacing_ratio, grid.horizontal(), grid.vertical());
    r.gain[1] = t.gain[1];
    return r;
  }
  if (rec.ris.size() != sc.cfg.m_elems())
    throw ConfigError("beampattern needs a surface of m_y * m_z elements");
  return beampattern(rec.ris, rec.tx, sc.ch.H, sc.cfg.m_y, sc.cfg.m_z, sc.cfg.element_spacing_ratio,
                     grid.horizontal(), grid.vertical());
}

std::vector<std::array<double, 2>> target_angles(const ScenarioConfig& cfg, Space d) {
  std::vector<std::array<double, 2>> out;
  for (const auto& t : cfg.targets) {
    if (t.pos) {
      const Node n = make_node(*t.pos, cfg.ris_pos);
      if (n.space != d) continue;
      const Vec3 u = (*t.pos - cfg.ris_pos) / n.distance;
      const double deg = 180.0 / kPi;
      out.push_back({std::atan2(u[1], std::abs(u[0])) * deg, std::asin(u[2]) * deg});
    } else if (t.space && *t.space == d) {
      out.push_back({t.horizontal_deg, t.vertical_deg});
    }
  }
  return out;
}

double nearest_target_deg(const Peak& p, const std::vector<std::array<double, 2>>& targets) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : targets)
    best = std::min(best, std::max(std::abs(p.horizontal_deg - t[0]), std::abs(p.vertical_deg - t[1])));
  return best;
}

}  // namespace mfris
