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

#include "mfris/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <json.hpp>

namespace mfris {

using json = nlohmann::json;

double round_sig9(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return std::strtod(buf, nullptr);
}

namespace {

// NaN and inf have no JSON literal; they are written as null.
json num(double x) { return std::isfinite(x) ? json(round_sig9(x)) : json(nullptr); }

json cvec(const CVec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back({num(v[i].real()), num(v[i].imag())});
  return a;
}

json cmat(const CMat& m) {
  json cols = json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) cols.push_back(cvec(m.col(j)));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"columns", cols}};
}

json rvec(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

CVec read_cvec(const json& a) {
  CVec v(static_cast<Eigen::Index>(a.size()));
  for (size_t i = 0; i < a.size(); ++i) v[i] = cplx(a[i].at(0).get<double>(), a[i].at(1).get<double>());
  return v;
}

CMat read_cmat(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>(), cols = j.at("cols").get<Eigen::Index>();
  CMat m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    const CVec v = read_cvec(j.at("columns").at(c));
    if (v.size() != rows) throw ConfigError("solution: column length mismatch");
    m.col(c) = v;
  }
  return m;
}

json design_json(const SolutionRecord& r) {
  json j;
  j["protocol"] = to_string(r.ris.protocol);
  j["theta_r"] = cvec(r.ris.theta_r);
  j["theta_t"] = cvec(r.ris.theta_t);
  j["mode_mask"] = r.ris.mode_mask;
  j["tau_r"] = num(r.ris.tau_r);
  j["tau_t"] = num(r.ris.tau_t);
  j["W"] = cmat(r.tx.W);
  j["F"] = cmat(r.tx.F);
  j["filter_r"] = cvec(r.filters.m[0]);
  j["filter_t"] = cvec(r.filters.m[1]);
  return j;
}

void read_design(const json& j, SolutionRecord& r) {
  r.ris.protocol = protocol_from_string(j.at("protocol").get<std::string>());
  r.ris.theta_r = read_cvec(j.at("theta_r"));
  r.ris.theta_t = read_cvec(j.at("theta_t"));
  r.ris.mode_mask = j.at("mode_mask").get<std::vector<int>>();
  r.ris.tau_r = j.at("tau_r").get<double>();
  r.ris.tau_t = j.at("tau_t").get<double>();
  r.tx.W = read_cmat(j.at("W"));
  r.tx.F = read_cmat(j.at("F"));
  r.filters.m[0] = read_cvec(j.at("filter_r"));
  r.filters.m[1] = read_cvec(j.at("filter_t"));
}

}  // namespace

std::string solution_to_json(const SolutionRecord& rec, const ScenarioConfig& cfg) {
  json j;
  j["config"] = json::parse(config_to_json(cfg));
  j["scheme"] = rec.scheme;
  j["objective"] = num(rec.objective);
  j["objective_db"] = num(rec.objective > 0.0 ? linear_to_db(rec.objective) : -INFINITY);
  j["sensing_sinr"] = rvec({rec.report.sensing_sinr[0], rec.report.sensing_sinr[1]});
  j["user_sinr"] = rvec(rec.report.user_sinr);
  j["user_rate"] = rvec(rec.user_rates);
  j["bs_power"] = num(rec.report.bs_power);
  j["ris_power"] = num(rec.report.ris_power);
  j["worst_violation"] = num(rec.report.worst_violation);
  j["violations"] = rec.report.violations;
  j["feasible"] = rec.feasible;
  j["converged"] = rec.converged;
  j["iterations"] = rec.iterations;
  j["monotone"] = rec.monotone;
  j["outer_objective"] = rvec(rec.outer_objective);
  j["notes"] = rec.notes;
  j["design"] = design_json(rec);
  if (!rec.phases.empty()) {
    json ph = json::array();
    for (const auto& p : rec.phases) ph.push_back(design_json(p));
    j["phases"] = ph;
  }
  return j.dump(2) + "\n";
}

LoadedSolution solution_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    LoadedSolution out;
    out.cfg = load_config(j.at("config").dump());
    out.rec.scheme = j.at("scheme").get<std::string>();
    out.rec.objective = j.at("objective").is_null() ? NAN : j.at("objective").get<double>();
    out.rec.feasible = j.at("feasible").get<bool>();
    read_design(j.at("design"), out.rec);
    out.rec.protocol = out.rec.ris.protocol;
    if (j.contains("phases"))
      for (const auto& p : j.at("phases")) {
        SolutionRecord r;
        read_design(p, r);
        r.protocol = r.ris.protocol;
        out.rec.phases.push_back(std::move(r));
      }
    return out;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("solution file: ") + e.what());
  }
}

}  // namespace mfris
