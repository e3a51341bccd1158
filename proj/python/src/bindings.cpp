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

// Python bindings. Configurations cross the boundary as JSON text so the
// Python side sees exactly the keys the command-line tool accepts.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mfris/baselines.hpp"
#include "mfris/experiments.hpp"
#include "mfris/filter_design.hpp"
#include "mfris/io.hpp"

namespace py = pybind11;
using namespace mfris;

namespace {

ScenarioConfig config_of(const std::string& json, std::optional<std::uint64_t> seed) {
  ScenarioConfig c = json.empty() ? ScenarioConfig{} : load_config(json);
  if (seed) c.seed = *seed;
  return c;
}

py::dict record_dict(const SolutionRecord& rec, const ScenarioConfig& cfg) {
  py::dict d;
  d["scheme"] = rec.scheme;
  d["feasible"] = rec.feasible;
  d["objective"] = rec.objective;
  d["objective_db"] = linear_to_db(rec.objective);
  d["sensing_sinr"] = std::vector<double>{rec.report.sensing_sinr[0], rec.report.sensing_sinr[1]};
  d["user_rates"] = rec.user_rates;
  d["converged"] = rec.converged;
  d["iterations"] = rec.iterations;
  d["outer_objective"] = rec.outer_objective;
  d["notes"] = rec.notes;
  d["solution_json"] = solution_to_json(rec, cfg);
  return d;
}

}  // namespace

PYBIND11_MODULE(_mfris, m) {
  m.doc() = "multi-functional surface ISAC simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);
  py::register_exception<BackendUnavailableError>(m, "BackendUnavailableError", PyExc_RuntimeError);

  m.def("default_config", [] { return config_to_json(ScenarioConfig{}); },
        "Default scenario as JSON text.");
  m.def("normalize_config", [](const std::string& json) { return config_to_json(load_config(json)); },
        py::arg("config"), "Validates a scenario document and returns it with every field filled in.");
  m.def("scheme_names", &scheme_names);

  m.def(
      "run",
      [](const std::string& scheme, const std::string& config, std::optional<std::uint64_t> seed) {
        const ScenarioConfig c = config_of(config, seed);
        SolutionRecord rec;
        {
          py::gil_scoped_release release;
          rec = run_scheme(canonical_scheme(scheme), c);
        }
        return record_dict(rec, c);
      },
      py::arg("scheme") = "ES", py::arg("config") = "", py::arg("seed") = py::none(),
      "Solves one scenario. Raises InfeasibleError when the rate constraints cannot be met.");

  m.def(
      "sweep",
      [](const std::string& axis, std::vector<double> values, const std::vector<std::uint64_t>& seeds,
         std::vector<std::string> schemes, const std::string& config, int jobs) {
        const std::string ax = canonical_axis(axis);
        if (values.empty()) values = default_axis_values(ax);
        for (auto& s : schemes) s = canonical_scheme(s);
        const ScenarioConfig c = config_of(config, std::nullopt);
        std::vector<SweepCell> cells;
        {
          py::gil_scoped_release release;
          cells = run_sweep(c, ax, values, seeds, schemes, jobs);
        }
        py::list out;
        for (const auto& cell : cells) {
          py::dict d;
          d["scheme"] = cell.scheme;
          d["axis"] = cell.axis;
          d["value"] = cell.value;
          d["seed"] = cell.seed;
          d["objective_db"] = cell.objective_db;
          d["rate_min"] = cell.rate_min;
          d["feasible"] = cell.feasible;
          d["error"] = cell.error;
          out.append(d);
        }
        return out;
      },
      py::arg("axis"), py::arg("values") = std::vector<double>{}, py::arg("seeds") = std::vector<std::uint64_t>{1},
      py::arg("schemes") = std::vector<std::string>{"ES"}, py::arg("config") = "", py::arg("jobs") = 1);

  m.def(
      "beampattern",
      [](const std::string& solution_json, double h_step, double v_step) {
        const LoadedSolution sol = solution_from_json(solution_json);
        const Scenario sc = make_scenario(sol.cfg);
        AngleGrid g;
        g.h_step = h_step;
        g.v_step = v_step;
        const BeamPattern bp = solution_beampattern(sc, sol.rec, g);
        py::dict d;
        d["horizontal_deg"] = bp.horizontal_deg;
        d["vertical_deg"] = bp.vertical_deg;
        d["r"] = RMat(bp.gain[0]);
        d["t"] = RMat(bp.gain[1]);
        return d;
      },
      py::arg("solution_json"), py::arg("h_step") = 1.0, py::arg("v_step") = 1.0,
      "Gain grids (rows = vertical angle) of a solution written by run().");

  m.def("four_target_config", [] { return config_to_json(four_target_config(ScenarioConfig{})); });

  m.def(
      "rayleigh_argmax",
      [](const CMat& A, const CMat& B, double p) {
        const RayleighResult r = generalized_rayleigh_argmax(A, B, p);
        return py::make_tuple(CVec(r.v), r.value, r.degenerate);
      },
      py::arg("A"), py::arg("B"), py::arg("p") = 1.0,
      "Maximiser of v^H A v / v^H B v with ||v||^2 = p.");
}
