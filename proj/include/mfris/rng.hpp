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
#include <random>

#include "mfris/types.hpp"

namespace mfris {

/**
 * Seeded generator used by every stochastic step of a scenario build.
 *
 * Wraps std::mt19937_64 but draws uniforms and normals from the raw 64-bit
 * stream itself, so sequences are bit-identical across standard libraries
 * (std:: distributions are implementation-defined).
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the second variate is cached.
  double normal();

  // Circularly-symmetric complex Gaussian with unit variance E|x|^2 = 1.
  cplx complex_normal();

  CMat complex_normal(Eigen::Index rows, Eigen::Index cols);

  double phase() { return uniform(0.0, 2.0 * kPi); }

  // Independent child generator; deterministic in (parent state, stream).
  Rng split(std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

// SplitMix64 finalizer, used to derive well-separated seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace mfris
