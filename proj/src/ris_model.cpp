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

#include "mfris/ris_model.hpp"

#include <cmath>
#include <sstream>

namespace mfris {

namespace {

std::string at(const char* what, int m) {
  std::ostringstream os;
  os << what << " at element " << m;
  return os.str();
}

}  // namespace

std::vector<std::string> validate(const RisConfiguration& c, double beta_max, double tol) {
  std::vector<std::string> out;
  const int m = c.size();
  if (c.theta_t.size() != m) throw ConfigError("theta_r and theta_t lengths differ");
  const double scale = std::max(1.0, beta_max);
  const double eps = tol * scale;

  auto mask_face = [&](int i) -> int {
    if (c.mode_mask.empty()) return -1;
    return c.mode_mask[i];
  };
  if (!c.mode_mask.empty() && static_cast<int>(c.mode_mask.size()) != m)
    throw ConfigError("mode mask length differs from element count");

  for (int i = 0; i < m; ++i) {
    const double pr = std::norm(c.theta_r[i]);
    const double pt = std::norm(c.theta_t[i]);
    if (!std::isfinite(pr) || !std::isfinite(pt)) {
      out.push_back(at("non-finite coefficient", i));
      continue;
    }
    switch (c.protocol) {
      case Protocol::kES:
        if (pr + pt > beta_max + eps) out.push_back(at("sum amplification exceeds beta_max", i));
        break;
      case Protocol::kMS: {
        if (pr + pt > beta_max + eps) out.push_back(at("sum amplification exceeds beta_max", i));
        if (std::sqrt(pr * pt) > eps) out.push_back(at("both faces active in mode switching", i));
        const int face = mask_face(i);
        if (face == 0 && pt > eps) out.push_back(at("element assigned to r carries a t coefficient", i));
        if (face == 1 && pr > eps) out.push_back(at("element assigned to t carries an r coefficient", i));
        break;
      }
      case Protocol::kTS:
        if (pr > beta_max + eps) out.push_back(at("r-phase amplification exceeds beta_max", i));
        if (pt > beta_max + eps) out.push_back(at("t-phase amplification exceeds beta_max", i));
        break;
      case Protocol::kSTAR:
        if (std::abs(pr + pt - 1.0) > tol) out.push_back(at("energy split does not sum to one", i));
        break;
      case Protocol::kActive:
      case Protocol::kPassive: {
        const int face = mask_face(i);
        if (face < 0) {
          out.push_back("split surface requires a group mask");
          return out;
        }
        const double serving = face == 0 ? pr : pt;
        const double idle = face == 0 ? pt : pr;
        if (idle > eps) out.push_back(at("idle face of a grouped element is non-zero", i));
        if (c.protocol == Protocol::kActive) {
          if (serving < 1.0 - tol) out.push_back(at("active gain below one", i));
          if (serving > beta_max + eps) out.push_back(at("active gain exceeds beta_max", i));
        } else if (std::abs(serving - 1.0) > tol) {
          out.push_back(at("passive element is not unit modulus", i));
        }
        break;
      }
    }
  }
  if (c.protocol == Protocol::kTS) {
    if (c.tau_r < -tol || c.tau_t < -tol || std::abs(c.tau_r + c.tau_t - 1.0) > tol)
      out.push_back("time split must be non-negative and sum to one");
  }
  return out;
}

std::vector<int> split_group_mask(int m) {
  std::vector<int> mask(m, 0);
  for (int i = m / 2; i < m; ++i) mask[i] = 1;
  return mask;
}

RisConfiguration random_feasible(Protocol p, int m, double beta_max, Rng& rng) {
  RisConfiguration c;
  c.protocol = p;
  c.theta_r = CVec::Zero(m);
  c.theta_t = CVec::Zero(m);
  switch (p) {
    case Protocol::kES:
      for (int i = 0; i < m; ++i) {
        const double total = rng.uniform(0.0, beta_max);
        const double split = rng.uniform();
        c.theta_r[i] = std::polar(std::sqrt(total * split), rng.phase());
        c.theta_t[i] = std::polar(std::sqrt(total * (1.0 - split)), rng.phase());
      }
      break;
    case Protocol::kMS:
      c.mode_mask.resize(m);
      for (int i = 0; i < m; ++i) {
        const int face = rng.uniform() < 0.5 ? 0 : 1;
        c.mode_mask[i] = face;
        const cplx v = std::polar(std::sqrt(rng.uniform(0.0, beta_max)), rng.phase());
        (face == 0 ? c.theta_r : c.theta_t)[i] = v;
      }
      break;
    case Protocol::kTS:
      c.tau_r = 0.5;
      c.tau_t = 0.5;
      for (int i = 0; i < m; ++i) {
        c.theta_r[i] = std::polar(std::sqrt(rng.uniform(0.0, beta_max)), rng.phase());
        c.theta_t[i] = std::polar(std::sqrt(rng.uniform(0.0, beta_max)), rng.phase());
      }
      break;
    case Protocol::kSTAR:
      for (int i = 0; i < m; ++i) {
        const double br = rng.uniform();
        c.theta_r[i] = std::polar(std::sqrt(br), rng.phase());
        c.theta_t[i] = std::polar(std::sqrt(1.0 - br), rng.phase());
      }
      break;
    case Protocol::kActive:
    case Protocol::kPassive:
      c.mode_mask = split_group_mask(m);
      for (int i = 0; i < m; ++i) {
        const double amp =
            p == Protocol::kActive ? std::sqrt(rng.uniform(1.0, std::max(1.0, beta_max))) : 1.0;
        (c.mode_mask[i] == 0 ? c.theta_r : c.theta_t)[i] = std::polar(amp, rng.phase());
      }
      break;
  }
  return c;
}

double amplification_power(const RisConfiguration& c, const TransmitDesign& tx, const CMat& H,
                           double sigma_r2) {
  const CMat HX = H * tx.beams();
  // ||Theta H x||^2 = sum_m |theta_m|^2 |(Hx)_m|^2
  const RVec incident = HX.cwiseAbs2().rowwise().sum();
  double p = 0.0;
  for (Space d : kSpaces) {
    const RVec gain = c.theta(d).cwiseAbs2();
    p += gain.dot(incident) + sigma_r2 * gain.sum();
  }
  return p;
}

}  // namespace mfris
