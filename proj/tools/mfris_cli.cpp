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

// mfris run|sweep|convergence|beampattern
//
// Exit codes: 0 ok, 2 configuration error, 3 solver failure, 4 infeasible.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfris/baselines.hpp"
#include "mfris/experiments.hpp"
#include "mfris/io.hpp"

namespace fs = std::filesystem;
using namespace mfris;

namespace {

constexpr int kOk = 0, kConfig = 2, kSolver = 3, kInfeasible = 4;

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// "1,2,5" or "1-20"
std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const auto& part : split(s)) {
    const auto dash = part.find('-');
    try {
      if (dash == std::string::npos) {
        out.push_back(std::stoull(part));
      } else {
        const auto lo = std::stoull(part.substr(0, dash)), hi = std::stoull(part.substr(dash + 1));
        if (hi < lo) throw ConfigError("seed range " + part + " is empty");
        for (auto v = lo; v <= hi; ++v) out.push_back(v);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("cannot read seeds from '" + s + "'");
    }
  }
  if (out.empty()) throw ConfigError("no seeds given");
  return out;
}

std::vector<double> parse_values(const std::string& s) {
  std::vector<double> out;
  for (const auto& part : split(s)) {
    try {
      out.push_back(std::stod(part));
    } catch (const std::logic_error&) {
      throw ConfigError("cannot read value '" + part + "'");
    }
  }
  return out;
}

ScenarioConfig base_config(const std::string& path) {
  return path.empty() ? ScenarioConfig{} : load_config_file(path);
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream os(dir / name);
  if (!os) throw ConfigError("cannot write " + (dir / name).string());
  return os;
}

struct Common {
  std::string config;
  std::string out_dir = ".";
  int jobs = 1;
  bool timing = false;
};

int cmd_run(const Common& c, std::uint64_t seed, bool seed_set, const std::string& protocol) {
  ScenarioConfig cfg = base_config(c.config);
  if (seed_set) cfg.seed = seed;
  std::string scheme = to_string(cfg.protocol);
  if (!protocol.empty()) {
    scheme = canonical_scheme(protocol);
    cfg.protocol = scheme_protocol(scheme);
    cfg.p_bs_dbm.reset();
  }
  const SolutionRecord rec = run_scheme(scheme, cfg);
  ScenarioConfig used = cfg;
  used.protocol = scheme_protocol(scheme);
  open_out(c.out_dir, "solution.json") << solution_to_json(rec, used);
  auto trace = open_out(c.out_dir, "trace.csv");
  write_trace_csv(rec, trace, c.timing);
  if (c.timing) open_out(c.out_dir, "complexity.txt") << complexity_report(used, &rec);
  std::cout << rec.scheme << " seed " << used.seed << ": objective " << rec.objective << " ("
            << linear_to_db(rec.objective) << " dB), " << (rec.feasible ? "feasible" : "INFEASIBLE") << ", "
            << rec.iterations << " iterations" << (rec.converged ? "" : " (not converged)") << "\n";
  for (const auto& n : rec.notes) std::cout << "  note: " << n << "\n";
  return rec.feasible ? kOk : kInfeasible;
}

int cmd_sweep(const Common& c, const std::string& axis, const std::string& values, const std::string& seeds,
              const std::string& schemes) {
  const ScenarioConfig cfg = base_config(c.config);
  const std::string a = canonical_axis(axis);
  const std::vector<double> v = values.empty() ? default_axis_values(a) : parse_values(values);
  const auto cells = run_sweep(cfg, a, v, parse_seeds(seeds), split(schemes), c.jobs);
  auto os = open_out(c.out_dir, "sweep_" + a + ".csv");
  write_sweep_csv(cells, os);
  int failed = 0;
  for (const auto& cell : cells)
    if (!cell.error.empty()) {
      ++failed;
      std::cerr << "cell " << cell.scheme << " " << a << "=" << cell.value << " seed " << cell.seed
                << " failed: " << cell.error << "\n";
    }
  for (const auto& s : summarize(cells))
    std::cout << s.scheme << " " << a << "=" << s.value << ": mean " << s.mean_db << " dB over " << s.count
              << " seeds\n";
  std::cout << cells.size() << " cells, " << failed << " failed\n";
  return kOk;
}

int cmd_convergence(const Common& c, const std::string& seeds, const std::string& dims) {
  const ScenarioConfig cfg = base_config(c.config);
  std::vector<Dims> d;
  for (const auto& part : split(dims)) d.push_back(parse_dims(part));
  const auto runs = run_convergence(cfg, d, parse_seeds(seeds), c.jobs);
  auto os = open_out(c.out_dir, "convergence.csv");
  write_convergence_csv(runs, os);
  auto sum = open_out(c.out_dir, "convergence_summary.csv");
  sum << "n_tx,m,m_s,seed,iterations,converged,monotone,worst_drop" << (c.timing ? ",wall_ms" : "") << "\n";
  sum << std::setprecision(9);
  bool all_monotone = true;
  for (const auto& r : runs) {
    sum << r.dims.n_tx << "," << r.dims.m << "," << r.dims.m_s << "," << r.seed << "," << r.rec.iterations << ","
        << (r.rec.converged ? 1 : 0) << "," << (r.rec.monotone ? 1 : 0) << "," << r.rec.worst_drop;
    if (c.timing) sum << "," << r.rec.filter_ms + r.rec.tx_ms + r.rec.ris_ms;
    sum << "\n";
    all_monotone = all_monotone && r.rec.monotone;
    for (const auto& n : r.rec.notes)
      if (n.rfind("failed: ", 0) == 0) std::cerr << "seed " << r.seed << ": " << n << "\n";
  }
  std::cout << runs.size() << " runs, " << (all_monotone ? "all traces non-decreasing" : "NON-MONOTONE trace found")
            << "\n";
  return all_monotone ? kOk : kSolver;
}

int cmd_beampattern(const Common& c, const std::string& solution, bool four_targets, std::uint64_t seed,
                    bool seed_set, const AngleGrid& grid) {
  ScenarioConfig cfg;
  SolutionRecord rec;
  if (!solution.empty()) {
    std::ifstream is(solution);
    if (!is) throw ConfigError("cannot read " + solution);
    std::stringstream ss;
    ss << is.rdbuf();
    LoadedSolution ls = solution_from_json(ss.str());
    cfg = ls.cfg;
    rec = std::move(ls.rec);
  } else {
    cfg = base_config(c.config);
    if (four_targets) cfg = four_target_config(cfg);
    if (seed_set) cfg.seed = seed;
    rec = run_scheme(to_string(cfg.protocol), cfg);
    open_out(c.out_dir, "solution.json") << solution_to_json(rec, cfg);
  }
  const Scenario sc = make_scenario(cfg);
  const BeamPattern bp = solution_beampattern(sc, rec, grid);
  auto os = open_out(c.out_dir, "beampattern.csv");
  write_beampattern_csv(bp, os);

  nlohmann::json meta;
  for (Space d : kSpaces) {
    const auto targets = target_angles(cfg, d);
    nlohmann::json face;
    face["targets_deg"] = targets;
    nlohmann::json peaks = nlohmann::json::array();
    for (const Peak& p : beampattern_peaks(bp, d, 2))
      peaks.push_back({{"horizontal_deg", p.horizontal_deg},
                       {"vertical_deg", p.vertical_deg},
                       {"gain_db", round_sig9(linear_to_db(p.gain))},
                       {"nearest_target_deg", targets.empty() ? nlohmann::json(nullptr)
                                                              : nlohmann::json(nearest_target_deg(p, targets))}});
    face["top_peaks"] = peaks;
    meta[space_tag(d)] = face;
  }
  meta["grid"] = {{"horizontal", {grid.h_min, grid.h_max, grid.h_step}},
                  {"vertical", {grid.v_min, grid.v_max, grid.v_step}}};
  open_out(c.out_dir, "beampattern_meta.json") << meta.dump(2) << "\n";
  std::cout << "beampattern written to " << (fs::path(c.out_dir) / "beampattern.csv").string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-functional surface ISAC optimiser"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "scenario JSON (defaults when omitted)");
    sub->add_option("--out-dir", common.out_dir, "output directory");
    sub->add_option("--jobs", common.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--timing", common.timing, "write wall-clock times (outputs are then not reproducible)");
  };

  std::uint64_t seed = 1;
  std::string protocol, seeds = "1", axis, values, schemes = "ES", dims = "8x32x8", solution;
  bool four_targets = false;
  AngleGrid grid;

  auto* run = app.add_subcommand("run", "one optimisation run");
  add_common(run);
  auto* seed_opt = run->add_option("--seed", seed, "scenario seed");
  run->add_option("--protocol,--scheme", protocol, "ES MS TS STAR ACTIVE PASSIVE RANDOM EXHAUSTIVE SDR");

  auto* sweep = app.add_subcommand("sweep", "parameter sweep");
  add_common(sweep);
  sweep->add_option("--axis", axis, "M, Ms, P_total or R_th")->required();
  sweep->add_option("--values", values, "comma-separated ascending values (default grid when omitted)");
  sweep->add_option("--seeds", seeds, "seeds, e.g. 1-20 or 1,4,9");
  sweep->add_option("--schemes", schemes, "comma-separated schemes");

  auto* conv = app.add_subcommand("convergence", "outer-loop traces");
  add_common(conv);
  conv->add_option("--seeds", seeds, "seeds, e.g. 1-20");
  conv->add_option("--dims", dims, "comma-separated NxMxMs tuples");

  auto* beam = app.add_subcommand("beampattern", "surface beampattern of a solution");
  add_common(beam);
  beam->add_option("--solution", solution, "solution.json from run (solves the config when omitted)");
  beam->add_flag("--four-targets", four_targets, "place the four targets of the beampattern scenario");
  auto* beam_seed = beam->add_option("--seed", seed, "scenario seed");
  beam->add_option("--h-step", grid.h_step, "horizontal grid step, degrees")->check(CLI::PositiveNumber);
  beam->add_option("--v-step", grid.v_step, "vertical grid step, degrees")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(common, seed, seed_opt->count() > 0, protocol);
    if (*sweep) return cmd_sweep(common, axis, values, seeds, schemes);
    if (*conv) return cmd_convergence(common, seeds, dims);
    if (*beam) return cmd_beampattern(common, solution, four_targets, seed, beam_seed->count() > 0, grid);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const BackendUnavailableError& e) {
    std::cerr << "solver unavailable: " << e.what() << "\n";
    return kSolver;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolver;
  }
  return kConfig;
}
