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

#include "mfris/experiments.hpp"
#include "mfris/io.hpp"

using namespace mfris;
using Catch::Approx;

TEST_CASE("experiments: scenario streams are shared across schemes", "[experiments]") {
  ScenarioConfig c;
  c.seed = 9;
  const Scenario es = make_scenario(c);
  ScenarioConfig p = c;
  p.protocol = Protocol::kPassive;
  const Scenario pas = make_scenario(p);
  CHECK(pas.ch.m_elems == 2 * es.ch.m_elems);
  CHECK(pas.ch.H.topRows(32) == es.ch.H);
  for (size_t i = 0; i < es.geom.users.size(); ++i) CHECK(es.geom.users[i].pos == pas.geom.users[i].pos);
  const Scenario again = make_scenario(c);
  CHECK(again.ch.G(Space::kRefract) == es.ch.G(Space::kRefract));
}

TEST_CASE("experiments: scheme registry", "[experiments]") {
  CHECK(scheme_names().size() == 9);
  CHECK(canonical_scheme("passive") == "PASSIVE");
  CHECK(canonical_scheme("es") == "ES");
  CHECK_THROWS_AS(canonical_scheme("foo"), ConfigError);
  CHECK(scheme_protocol("RANDOM") == Protocol::kES);
  CHECK(scheme_protocol("STAR") == Protocol::kSTAR);
  CHECK(scheme_protocol("TS") == Protocol::kTS);
}

TEST_CASE("experiments: axis mapping", "[experiments]") {
  ScenarioConfig c;
  CHECK(canonical_axis("m") == "M");
  CHECK(canonical_axis("M_s") == "Ms");
  CHECK(canonical_axis("P") == "P_total");
  CHECK(canonical_axis("r_th") == "R_th");
  CHECK_THROWS_AS(canonical_axis("N"), ConfigError);

  const ScenarioConfig m = apply_axis(c, "M", 48);
  CHECK(m.m_y == 12);
  CHECK(m.m_z == 4);
  CHECK(m.m_elems() == 48);
  const ScenarioConfig s = apply_axis(c, "Ms", 12);
  CHECK(s.m_v == 6);
  CHECK(s.m_h == 6);
  CHECK_THROWS_AS(apply_axis(c, "M", 18), ConfigError);
  CHECK_THROWS_AS(apply_axis(c, "Ms", 7), ConfigError);
  c.p_bs_dbm = watts_to_dbm(c.p_bs_w());
  const ScenarioConfig p = apply_axis(c, "P_total", 38);
  CHECK(p.p_total_dbm == 38.0);
  CHECK_FALSE(p.p_bs_dbm.has_value());
  CHECK_NOTHROW(p.validate());
  CHECK(apply_axis(c, "R_th", 1.5).r_th == 1.5);
  CHECK(default_axis_values("P_total") == std::vector<double>{35, 38, 41, 44, 47, 50});
  CHECK(default_axis_values("R_th") == std::vector<double>{0.5, 1, 1.5, 2});
}

TEST_CASE("experiments: sweep cells, summary and CSV schema", "[experiments]") {
  ScenarioConfig c;
  c.m_y = 2;
  const auto cells = run_sweep(c, "R_th", {0.25, 0.5}, {1, 2}, {"ES", "ACTIVE"}, 2);
  REQUIRE(cells.size() == 8);
  CHECK(cells[0].scheme == "ES");
  CHECK(cells[0].value == 0.25);
  CHECK(cells[0].seed == 1u);
  CHECK(cells[7].scheme == "ACTIVE");
  CHECK(cells[7].seed == 2u);
  const auto again = run_sweep(c, "R_th", {0.25, 0.5}, {1, 2}, {"ES", "ACTIVE"}, 1);
  for (size_t i = 0; i < cells.size(); ++i)
    if (std::isfinite(cells[i].objective)) CHECK(again[i].objective == cells[i].objective);

  const auto sum = summarize(cells);
  REQUIRE(sum.size() == 4);
  for (const auto& s : sum) CHECK(s.count <= 2);

  std::ostringstream os;
  write_sweep_csv(cells, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "scheme,axis,value,seed,objective_db,rate_min,feasible");
  int rows = 0, stats = 0;
  while (std::getline(is, line)) {
    ++rows;
    if (line.find(",mean,") != std::string::npos || line.find(",std,") != std::string::npos) ++stats;
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
  }
  CHECK(rows == 8 + 8);
  CHECK(stats == 8);
}

TEST_CASE("experiments: convergence dims", "[experiments]") {
  const Dims d = parse_dims("4x16x6");
  CHECK(d.n_tx == 4);
  CHECK(d.m == 16);
  CHECK(d.m_s == 6);
  CHECK_THROWS_AS(parse_dims("4x15x6"), ConfigError);
  CHECK_THROWS_AS(parse_dims("4x16"), ConfigError);
  const ScenarioConfig c = apply_dims(ScenarioConfig{}, d);
  CHECK(c.n_tx == 4);
  CHECK(c.m_elems() == 16);
  CHECK(c.m_sense() == 6);

  const auto runs = run_convergence(ScenarioConfig{}, {parse_dims("8x16x8")}, {3}, 1);
  REQUIRE(runs.size() == 1);
  REQUIRE(runs[0].rec.feasible);
  std::ostringstream os;
  write_convergence_csv(runs, os);
  CHECK(os.str().rfind("n_tx,m,m_s,seed,iter,objective,objective_db\n8,16,8,3,0,", 0) == 0);
}

TEST_CASE("experiments: beampattern scenario", "[experiments]") {
  const ScenarioConfig c = four_target_config(ScenarioConfig{});
  const auto r = target_angles(c, Space::kReflect);
  const auto t = target_angles(c, Space::kRefract);
  REQUIRE(r.size() == 2);
  REQUIRE(t.size() == 2);
  CHECK(r[0][0] == Approx(60.0));
  CHECK(r[1][1] == Approx(70.0));
  CHECK(t[0][1] == Approx(20.0));
  CHECK(t[1][0] == Approx(-60.0));
  CHECK(nearest_target_deg(Peak{57.0, 12.0, 1.0}, r) == Approx(3.0));

  AngleGrid g;
  CHECK(g.horizontal().size() == 181);
  g.v_min = 0.0;
  g.v_step = 2.0;
  CHECK(g.vertical().size() == 46);
}

TEST_CASE("experiments: solution file round trip", "[experiments]") {
  ScenarioConfig c;
  c.m_y = 4;
  c.seed = 3;
  const SolutionRecord rec = run_scheme("ES", c);
  const std::string text = solution_to_json(rec, c);
  const LoadedSolution back = solution_from_json(text);
  CHECK(back.rec.scheme == "ES");
  CHECK(back.rec.feasible == rec.feasible);
  CHECK((back.rec.ris.theta_r - rec.ris.theta_r).norm() <= 1e-8 * rec.ris.theta_r.norm());
  CHECK((back.rec.tx.W - rec.tx.W).norm() <= 1e-8 * rec.tx.W.norm());
  CHECK(config_to_json(back.cfg) == config_to_json(c));
  CHECK(solution_to_json(rec, c) == text);
  CHECK_THROWS_AS(solution_from_json("{}"), ConfigError);
  CHECK(round_sig9(1.23456789012) == 1.23456789);
}

TEST_CASE("experiments: parallel_for visits every index once", "[experiments]") {
  std::vector<int> hits(50, 0);
  parallel_for(50, 4, [&](int i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
}
