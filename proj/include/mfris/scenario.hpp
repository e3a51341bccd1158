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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfris/rng.hpp"
#include "mfris/types.hpp"

namespace mfris {

using Vec3 = Eigen::Vector3d;

// Placement override for one user or target. Either an absolute position or
// a direction (horizontal angle from the surface normal, vertical angle
// above the horizon) at a distance from the surface centre.
struct PlacementSpec {
  std::optional<Vec3> pos;
  std::optional<Space> space;
  double horizontal_deg = 0.0;
  double vertical_deg = 0.0;
  double distance = 20.0;
};

struct ScenarioConfig {
  // counts
  int n_tx = 8;
  int m_y = 8;
  int m_z = 4;
  int m_v = 4;
  int m_h = 4;
  int users_r = 2;
  int users_t = 2;
  int targets_r = 2;
  int targets_t = 2;

  // powers
  double p_total_dbm = 45.0;
  double p_ris_dbm = 15.0;
  std::optional<double> p_bs_dbm;  // derived from the split when absent
  double p_sense = 1.0;
  double r_th = 1.0;
  double noise_user_dbm = -80.0;
  double noise_ris_dbm = -80.0;
  double noise_sense_dbm = -80.0;

  // propagation
  double rician_k_db = 10.0;
  double h0_db = -30.0;
  double alpha0 = 2.8;
  double rcs = 1.0;
  double beta_max = 10.0;
  double element_spacing_ratio = 0.5;

  // deployment
  Vec3 bs_pos{0.0, 30.0, 3.0};
  Vec3 ris_pos{0.0, 0.0, 5.0};
  double box_half_width = 30.0;
  std::vector<PlacementSpec> users;    // empty: sampled
  std::vector<PlacementSpec> targets;  // empty: sampled

  Protocol protocol = Protocol::kES;
  std::uint64_t seed = 1;

  // solver controls
  double solver_tol = 1e-9;
  double sca_tol = 1e-3;
  double ao_tol = 1e-3;
  int max_sca_iters = 30;
  int max_ao_iters = 50;
  int restarts = 1;
  // Stopping tests compare |change| with tol |objective| when true, with tol
  // otherwise.
  bool relative_tol = true;
  // Per-element amplitude rule in the surface SOCP: "power" bounds
  // |theta_r|^2 + |theta_t|^2, "modulus_sum" bounds |theta_r| + |theta_t|.
  std::string amplitude_form = "power";

  int m_elems() const { return m_y * m_z; }
  int m_sense() const { return m_v + m_h; }
  int n_users() const { return users_r + users_t; }
  int n_targets() const { return targets_r + targets_t; }
  int users_in(Space d) const { return d == Space::kReflect ? users_r : users_t; }
  int targets_in(Space d) const { return d == Space::kReflect ? targets_r : targets_t; }

  double p_total_w() const;
  double p_ris_w() const;
  // BS budget: the remainder of the total budget for amplifying surfaces,
  // the whole budget for passive ones.
  double p_bs_w() const;
  double sigma_user2() const;
  double sigma_ris2() const;
  double sigma_sense2() const;
  double kappa() const;
  double h0() const;
  double gamma_th() const { return std::exp2(r_th) - 1.0; }

  // Throws ConfigError naming the offending field.
  void validate() const;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double w);
double db_to_linear(double db);
double linear_to_db(double x);

// Parses a JSON document; missing keys keep their defaults. Unknown keys
// are rejected so that typos do not silently fall back to defaults.
ScenarioConfig load_config(const std::string& json_text);
ScenarioConfig load_config_file(const std::string& path);
std::string config_to_json(const ScenarioConfig& cfg);

struct Node {
  Vec3 pos = Vec3::Zero();
  Space space = Space::kReflect;
  double distance = 0.0;   // to the surface centre, m
  double elevation = 0.0;  // phi, rad
  double azimuth = 0.0;    // varphi, rad (from the surface row axis)
};

struct Geometry {
  Vec3 ris_pos = Vec3::Zero();
  Node bs;
  std::vector<Node> users;    // reflection-space users first
  std::vector<Node> targets;  // reflection-space targets first
};

// Relative placement of p seen from the surface at ris.
Node make_node(const Vec3& p, const Vec3& ris);

// Direction with horizontal angle h from the surface normal (towards the
// given space) and vertical angle v above the horizon.
Vec3 direction_from_angles(Space d, double horizontal_rad, double vertical_rad);

// Half-space a point belongs to; throws for points on the surface plane.
Space space_of(const Vec3& p, const Vec3& ris);

Geometry sample_geometry(const ScenarioConfig& cfg, Rng& rng);

}  // namespace mfris
