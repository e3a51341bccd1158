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

#include "mfris/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mfris {

using nlohmann::json;

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::kES:
      return "ES";
    case Protocol::kMS:
      return "MS";
    case Protocol::kTS:
      return "TS";
    case Protocol::kSTAR:
      return "STAR";
    case Protocol::kActive:
      return "ACTIVE";
    case Protocol::kPassive:
      return "PASSIVE";
  }
  return "?";
}

Protocol protocol_from_string(const std::string& tag) {
  std::string t = tag;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::toupper(c); });
  if (t == "ES") return Protocol::kES;
  if (t == "MS") return Protocol::kMS;
  if (t == "TS") return Protocol::kTS;
  if (t == "STAR") return Protocol::kSTAR;
  if (t == "ACTIVE") return Protocol::kActive;
  if (t == "PASSIVE") return Protocol::kPassive;
  throw ConfigError("unknown protocol tag '" + tag + "'");
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double x) { return 10.0 * std::log10(x); }

double ScenarioConfig::p_total_w() const { return dbm_to_watts(p_total_dbm); }
double ScenarioConfig::p_ris_w() const { return dbm_to_watts(p_ris_dbm); }
double ScenarioConfig::p_bs_w() const {
  if (!amplifies(protocol)) return p_total_w();
  return p_total_w() - p_ris_w();
}
double ScenarioConfig::sigma_user2() const { return dbm_to_watts(noise_user_dbm); }
double ScenarioConfig::sigma_ris2() const { return dbm_to_watts(noise_ris_dbm); }
double ScenarioConfig::sigma_sense2() const { return dbm_to_watts(noise_sense_dbm); }
double ScenarioConfig::kappa() const { return db_to_linear(rician_k_db); }
double ScenarioConfig::h0() const { return db_to_linear(h0_db); }

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError("invariant violation: " + field + ": " + what);
}

void check_placements(const std::vector<PlacementSpec>& list, int n_r, int n_t, const Vec3& ris,
                      const std::string& field) {
  if (list.empty()) return;
  require(static_cast<int>(list.size()) == n_r + n_t, field,
          "list has " + std::to_string(list.size()) + " entries but counts imply " +
              std::to_string(n_r + n_t));
  int got_r = 0;
  for (const auto& p : list) {
    Space d;
    if (p.pos) {
      d = space_of(*p.pos, ris);
    } else {
      require(p.space.has_value(), field, "angle placement needs a space tag");
      require(p.distance > 0.0, field, "distance must be positive");
      d = *p.space;
    }
    if (d == Space::kReflect) ++got_r;
  }
  require(got_r == n_r, field, "per-space counts do not match the list");
}

}  // namespace

void ScenarioConfig::validate() const {
  require(n_tx >= 1, "n_tx", "must be >= 1");
  require(m_y >= 1 && m_z >= 1, "m_elems", "m_y and m_z must be >= 1");
  require(m_v >= 0 && m_h >= 0 && m_v + m_h >= 1, "m_sense", "m_v + m_h must be >= 1");
  require(users_r >= 0 && users_t >= 0, "users", "counts must be >= 0");
  require(targets_r >= 0 && targets_t >= 0, "targets", "counts must be >= 0");
  require(std::isfinite(p_total_dbm), "p_total_dbm", "must be finite");
  require(std::isfinite(p_ris_dbm), "p_ris_dbm", "must be finite");
  require(p_sense > 0.0, "p_sense", "must be positive");
  require(r_th >= 0.0, "r_th", "must be non-negative");
  require(std::isfinite(noise_user_dbm) && std::isfinite(noise_ris_dbm) &&
              std::isfinite(noise_sense_dbm),
          "noise", "must be finite");
  require(alpha0 > 0.0, "alpha0", "must be positive");
  require(rcs > 0.0, "rcs", "must be positive");
  require(beta_max >= 0.0, "beta_max", "must be non-negative");
  require(element_spacing_ratio > 0.0, "element_spacing_ratio", "must be positive");
  require(box_half_width > 0.0, "box_half_width", "must be positive");
  require(solver_tol > 0.0, "solver_tol", "must be positive");
  require(sca_tol > 0.0, "sca_tol", "must be positive");
  require(ao_tol > 0.0, "ao_tol", "must be positive");
  require(max_sca_iters >= 1, "max_sca_iters", "must be >= 1");
  require(max_ao_iters >= 1, "max_ao_iters", "must be >= 1");
  require(restarts >= 1, "restarts", "must be >= 1");
  require(amplitude_form == "power" || amplitude_form == "modulus_sum", "amplitude_form",
          "must be power or modulus_sum");
  if (amplifies(protocol)) {
    require(p_ris_w() < p_total_w(), "p_ris_dbm", "surface budget must be below the total budget");
  }
  if (p_bs_dbm) {
    const double want = p_bs_w();
    const double got = dbm_to_watts(*p_bs_dbm);
    require(std::abs(got - want) <= 1e-9 * want, "p_bs_dbm",
            "inconsistent with p_total_dbm and p_ris_dbm for protocol " + to_string(protocol));
  }
  require((bs_pos - ris_pos).norm() > 0.0, "bs_pos", "must differ from ris_pos");
  check_placements(users, users_r, users_t, ris_pos, "users");
  check_placements(targets, targets_r, targets_t, ris_pos, "targets");
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "n_tx", "m_elems", "m_y", "m_z", "m_sense", "m_v", "m_h", "users_r", "users_t", "targets_r",
      "targets_t", "p_total_dbm", "p_bs_dbm", "p_ris_dbm", "p_sense", "r_th", "noise_user_dbm",
      "noise_ris_dbm", "noise_sense_dbm", "rician_k_db", "h0_db", "alpha0", "rcs", "beta_max",
      "element_spacing_ratio", "bs_pos", "ris_pos", "box_half_width", "users", "targets",
      "protocol", "seed", "solver_tol", "sca_tol", "ao_tol", "max_sca_iters", "max_ao_iters",
      "restarts", "relative_tol", "amplitude_form"};
  return keys;
}

Vec3 parse_vec3(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("field " + field + ": expected [x, y, z]");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Space parse_space(const json& j, const std::string& field) {
  const auto s = j.get<std::string>();
  if (s == "r" || s == "reflect") return Space::kReflect;
  if (s == "t" || s == "refract") return Space::kRefract;
  throw ConfigError("field " + field + ": space must be 'r' or 't'");
}

std::vector<PlacementSpec> parse_placements(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError("field " + field + ": expected a list");
  std::vector<PlacementSpec> out;
  for (const auto& e : j) {
    PlacementSpec p;
    if (e.contains("pos")) {
      p.pos = parse_vec3(e["pos"], field + ".pos");
    } else {
      if (!e.contains("space")) throw ConfigError("field " + field + ": entry needs 'pos' or 'space'");
      p.space = parse_space(e["space"], field + ".space");
      p.horizontal_deg = e.value("horizontal_deg", 0.0);
      p.vertical_deg = e.value("vertical_deg", 0.0);
      p.distance = e.value("distance", 20.0);
    }
    out.push_back(p);
  }
  return out;
}

json placements_to_json(const std::vector<PlacementSpec>& list) {
  json arr = json::array();
  for (const auto& p : list) {
    if (p.pos) {
      arr.push_back({{"pos", {(*p.pos)[0], (*p.pos)[1], (*p.pos)[2]}}});
    } else {
      arr.push_back({{"space", space_tag(p.space.value_or(Space::kReflect))},
                     {"horizontal_deg", p.horizontal_deg},
                     {"vertical_deg", p.vertical_deg},
                     {"distance", p.distance}});
    }
  }
  return arr;
}

}  // namespace

ScenarioConfig load_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text.empty() ? std::string("{}") : json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config document: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config document must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known_keys().count(it.key())) throw ConfigError("unknown config field '" + it.key() + "'");

  ScenarioConfig c;
  try {
    auto get_int = [&](const char* k, int& dst) {
      if (j.contains(k)) dst = j[k].get<int>();
    };
    auto get_dbl = [&](const char* k, double& dst) {
      if (j.contains(k)) dst = j[k].get<double>();
    };
    get_int("n_tx", c.n_tx);
    if (j.contains("m_elems")) {
      const int m = j["m_elems"].get<int>();
      if (j.contains("m_y") || j.contains("m_z")) {
        get_int("m_y", c.m_y);
        get_int("m_z", c.m_z);
        if (c.m_y * c.m_z != m) throw ConfigError("invariant violation: m_elems: m_y * m_z != m_elems");
      } else {
        if (m % 4 != 0 || m <= 0)
          throw ConfigError("invariant violation: m_elems: must be a positive multiple of 4 "
                            "unless m_y and m_z are given");
        c.m_z = 4;
        c.m_y = m / 4;
      }
    } else {
      get_int("m_y", c.m_y);
      get_int("m_z", c.m_z);
    }
    if (j.contains("m_sense")) {
      const int ms = j["m_sense"].get<int>();
      if (j.contains("m_v") || j.contains("m_h")) {
        get_int("m_v", c.m_v);
        get_int("m_h", c.m_h);
        if (c.m_v + c.m_h != ms) throw ConfigError("invariant violation: m_sense: m_v + m_h != m_sense");
      } else {
        if (ms <= 0) throw ConfigError("invariant violation: m_sense: must be positive");
        c.m_v = ms / 2;
        c.m_h = ms - c.m_v;
      }
    } else {
      get_int("m_v", c.m_v);
      get_int("m_h", c.m_h);
    }
    get_int("users_r", c.users_r);
    get_int("users_t", c.users_t);
    get_int("targets_r", c.targets_r);
    get_int("targets_t", c.targets_t);
    get_dbl("p_ris_dbm", c.p_ris_dbm);
    if (j.contains("p_bs_dbm")) c.p_bs_dbm = j["p_bs_dbm"].get<double>();
    if (j.contains("protocol")) c.protocol = protocol_from_string(j["protocol"].get<std::string>());
    if (j.contains("p_total_dbm")) {
      c.p_total_dbm = j["p_total_dbm"].get<double>();
    } else if (c.p_bs_dbm) {
      const double total = amplifies(c.protocol) ? dbm_to_watts(*c.p_bs_dbm) + c.p_ris_w()
                                                 : dbm_to_watts(*c.p_bs_dbm);
      c.p_total_dbm = watts_to_dbm(total);
    }
    get_dbl("p_sense", c.p_sense);
    get_dbl("r_th", c.r_th);
    get_dbl("noise_user_dbm", c.noise_user_dbm);
    get_dbl("noise_ris_dbm", c.noise_ris_dbm);
    get_dbl("noise_sense_dbm", c.noise_sense_dbm);
    get_dbl("rician_k_db", c.rician_k_db);
    get_dbl("h0_db", c.h0_db);
    get_dbl("alpha0", c.alpha0);
    get_dbl("rcs", c.rcs);
    get_dbl("beta_max", c.beta_max);
    get_dbl("element_spacing_ratio", c.element_spacing_ratio);
    if (j.contains("bs_pos")) c.bs_pos = parse_vec3(j["bs_pos"], "bs_pos");
    if (j.contains("ris_pos")) c.ris_pos = parse_vec3(j["ris_pos"], "ris_pos");
    get_dbl("box_half_width", c.box_half_width);
    if (j.contains("users")) c.users = parse_placements(j["users"], "users");
    if (j.contains("targets")) c.targets = parse_placements(j["targets"], "targets");
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    get_dbl("solver_tol", c.solver_tol);
    get_dbl("sca_tol", c.sca_tol);
    get_dbl("ao_tol", c.ao_tol);
    get_int("max_sca_iters", c.max_sca_iters);
    get_int("max_ao_iters", c.max_ao_iters);
    get_int("restarts", c.restarts);
    if (j.contains("relative_tol")) c.relative_tol = j["relative_tol"].get<bool>();
    if (j.contains("amplitude_form")) c.amplitude_form = j["amplitude_form"].get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str());
}

std::string config_to_json(const ScenarioConfig& c) {
  json j = {{"n_tx", c.n_tx},
            {"m_y", c.m_y},
            {"m_z", c.m_z},
            {"m_v", c.m_v},
            {"m_h", c.m_h},
            {"users_r", c.users_r},
            {"users_t", c.users_t},
            {"targets_r", c.targets_r},
            {"targets_t", c.targets_t},
            {"p_total_dbm", c.p_total_dbm},
            {"p_ris_dbm", c.p_ris_dbm},
            {"p_sense", c.p_sense},
            {"r_th", c.r_th},
            {"noise_user_dbm", c.noise_user_dbm},
            {"noise_ris_dbm", c.noise_ris_dbm},
            {"noise_sense_dbm", c.noise_sense_dbm},
            {"rician_k_db", c.rician_k_db},
            {"h0_db", c.h0_db},
            {"alpha0", c.alpha0},
            {"rcs", c.rcs},
            {"beta_max", c.beta_max},
            {"element_spacing_ratio", c.element_spacing_ratio},
            {"bs_pos", {c.bs_pos[0], c.bs_pos[1], c.bs_pos[2]}},
            {"ris_pos", {c.ris_pos[0], c.ris_pos[1], c.ris_pos[2]}},
            {"box_half_width", c.box_half_width},
            {"protocol", to_string(c.protocol)},
            {"seed", c.seed},
            {"solver_tol", c.solver_tol},
            {"sca_tol", c.sca_tol},
            {"ao_tol", c.ao_tol},
            {"max_sca_iters", c.max_sca_iters},
            {"max_ao_iters", c.max_ao_iters},
            {"restarts", c.restarts},
            {"relative_tol", c.relative_tol},
            {"amplitude_form", c.amplitude_form}};
  if (c.p_bs_dbm) j["p_bs_dbm"] = *c.p_bs_dbm;
  if (!c.users.empty()) j["users"] = placements_to_json(c.users);
  if (!c.targets.empty()) j["targets"] = placements_to_json(c.targets);
  return j.dump(2);
}

// ---------------------------------------------------------------------------

Space space_of(const Vec3& p, const Vec3& ris) {
  const double x = p[0] - ris[0];
  if (x < 0.0) return Space::kReflect;
  if (x > 0.0) return Space::kRefract;
  throw ConfigError("point lies on the surface plane and has no half-space");
}

Node make_node(const Vec3& p, const Vec3& ris) {
  Node n;
  n.pos = p;
  const Vec3 d = p - ris;
  n.distance = d.norm();
  if (!(n.distance > 0.0)) throw ConfigError("node coincides with the surface centre");
  n.elevation = std::asin(std::clamp(d[2] / n.distance, -1.0, 1.0));
  // azimuth from the row (y) axis, so cos(phi) cos(varphi) is the y direction cosine
  n.azimuth = std::atan2(std::abs(d[0]), d[1]);
  n.space = d[0] < 0.0 ? Space::kReflect : Space::kRefract;
  return n;
}

Vec3 direction_from_angles(Space d, double h, double v) {
  const double s = d == Space::kReflect ? -1.0 : 1.0;
  return Vec3(s * std::cos(v) * std::cos(h), std::cos(v) * std::sin(h), std::sin(v));
}

namespace {

std::vector<Node> place(const std::vector<PlacementSpec>& specs, int n_r, int n_t,
                        const ScenarioConfig& cfg, Rng& rng, const char* what) {
  std::vector<Node> r, t;
  if (!specs.empty()) {
    for (const auto& s : specs) {
      Vec3 p;
      if (s.pos) {
        p = *s.pos;
      } else {
        const double deg = kPi / 180.0;
        p = cfg.ris_pos + s.distance * direction_from_angles(*s.space, s.horizontal_deg * deg,
                                                             s.vertical_deg * deg);
      }
      Node n = make_node(p, cfg.ris_pos);
      if (s.space) n.space = *s.space;
      (n.space == Space::kReflect ? r : t).push_back(n);
    }
  } else {
    const double w = cfg.box_half_width;
    long draws = 0;
    while (static_cast<int>(r.size()) < n_r || static_cast<int>(t.size()) < n_t) {
      if (++draws > 1000000)
        throw ConfigError(std::string("could not place ") + what + " after 1e6 draws");
      const double x = rng.uniform(-w, w);
      const double y = rng.uniform(-w, w);
      const Vec3 p(x, y, 0.0);
      if (x == cfg.ris_pos[0]) continue;
      const Space d = space_of(p, cfg.ris_pos);
      auto& bucket = d == Space::kReflect ? r : t;
      const int want = d == Space::kReflect ? n_r : n_t;
      if (static_cast<int>(bucket.size()) >= want) continue;
      bucket.push_back(make_node(p, cfg.ris_pos));
    }
  }
  std::vector<Node> out = r;
  out.insert(out.end(), t.begin(), t.end());
  return out;
}

}  // namespace

Geometry sample_geometry(const ScenarioConfig& cfg, Rng& rng) {
  Geometry g;
  g.ris_pos = cfg.ris_pos;
  g.bs = make_node(cfg.bs_pos, cfg.ris_pos);
  g.users = place(cfg.users, cfg.users_r, cfg.users_t, cfg, rng, "users");
  g.targets = place(cfg.targets, cfg.targets_r, cfg.targets_t, cfg, rng, "targets");
  return g;
}

}  // namespace mfris
