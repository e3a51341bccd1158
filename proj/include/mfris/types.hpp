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

#include <array>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mfris {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

// Half-space served by one face of the surface.
enum class Space : int { kReflect = 0, kRefract = 1 };

inline constexpr std::array<Space, 2> kSpaces{Space::kReflect, Space::kRefract};

inline constexpr int index_of(Space d) { return static_cast<int>(d); }
inline constexpr Space other(Space d) {
  return d == Space::kReflect ? Space::kRefract : Space::kReflect;
}
inline const char* space_tag(Space d) { return d == Space::kReflect ? "r" : "t"; }

// Operating protocol of the surface, including the conventional baselines.
enum class Protocol { kES, kMS, kTS, kSTAR, kActive, kPassive };

std::string to_string(Protocol p);
Protocol protocol_from_string(const std::string& tag);

// Protocols whose echo is collected by dedicated sensing elements on the
// surface (two-hop). The others bounce the echo back to the base station.
inline bool senses_on_surface(Protocol p) {
  return p == Protocol::kES || p == Protocol::kMS || p == Protocol::kTS;
}

// Protocols that carry per-element amplifiers (and hence amplification noise
// and a surface power budget).
inline bool amplifies(Protocol p) { return p != Protocol::kSTAR && p != Protocol::kPassive; }

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mfris
