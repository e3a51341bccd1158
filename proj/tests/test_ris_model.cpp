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

#include "mfris/ris_model.hpp"

using namespace mfris;
using Catch::Approx;

namespace {

RisConfiguration zeros(Protocol p, int m) {
  RisConfiguration c;
  c.protocol = p;
  c.theta_r = CVec::Zero(m);
  c.theta_t = CVec::Zero(m);
  return c;
}

}  // namespace

TEST_CASE("surface: energy-splitting budget", "[ris_model]") {
  RisConfiguration c = zeros(Protocol::kES, 4);
  CHECK(validate(c, 10.0).empty());
  c.theta_r[2] = std::sqrt(6.0);
  c.theta_t[2] = cplx(0.0, std::sqrt(6.0));
  const auto v = validate(c, 10.0);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("sum amplification exceeds beta_max") != std::string::npos);
  c.theta_t[2] = std::sqrt(4.0);
  CHECK(validate(c, 10.0).empty());
}

TEST_CASE("surface: protocol-specific rules", "[ris_model]") {
  RisConfiguration ms = zeros(Protocol::kMS, 2);
  ms.mode_mask = {0, 1};
  ms.theta_r[0] = 2.0;
  ms.theta_t[1] = 1.0;
  CHECK(validate(ms, 10.0).empty());
  ms.theta_t[0] = 0.5;
  CHECK_FALSE(validate(ms, 10.0).empty());

  RisConfiguration star = zeros(Protocol::kSTAR, 2);
  star.theta_r << std::sqrt(0.3), std::sqrt(0.9);
  star.theta_t << std::sqrt(0.7), std::sqrt(0.1);
  CHECK(validate(star, 10.0).empty());
  star.theta_t[1] = 0.0;
  CHECK(validate(star, 10.0).size() == 1);

  RisConfiguration pas = zeros(Protocol::kPassive, 4);
  pas.mode_mask = split_group_mask(4);
  CHECK(pas.mode_mask == std::vector<int>{0, 0, 1, 1});
  pas.theta_r.head(2).setConstant(std::polar(1.0, 0.3));
  pas.theta_t.tail(2).setConstant(std::polar(1.0, -1.2));
  CHECK(validate(pas, 10.0).empty());
  pas.theta_t[3] = 0.9;
  CHECK_FALSE(validate(pas, 10.0).empty());

  RisConfiguration act = zeros(Protocol::kActive, 2);
  act.mode_mask = split_group_mask(2);
  act.theta_r[0] = 3.0;
  act.theta_t[1] = 0.5;  // below unit gain
  CHECK(validate(act, 10.0).size() == 1);

  RisConfiguration ts = zeros(Protocol::kTS, 1);
  ts.tau_r = 0.7;
  ts.tau_t = 0.4;
  CHECK_FALSE(validate(ts, 10.0).empty());
}

TEST_CASE("surface: random feasible draws", "[ris_model]") {
  for (Protocol p : {Protocol::kES, Protocol::kMS, Protocol::kTS, Protocol::kSTAR, Protocol::kActive,
                     Protocol::kPassive}) {
    Rng rng(21);
    for (int i = 0; i < 50; ++i) CHECK(validate(random_feasible(p, 16, 10.0, rng), 10.0).empty());
  }
  Rng a(8), b(8);
  const auto x = random_feasible(Protocol::kES, 8, 10.0, a);
  const auto y = random_feasible(Protocol::kES, 8, 10.0, b);
  CHECK(x.theta_r == y.theta_r);
  CHECK(x.theta_t == y.theta_t);

  Rng rng(99);
  double acc = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto c = random_feasible(Protocol::kES, 1, 10.0, rng);
    acc += std::norm(c.theta_r[0]) + std::norm(c.theta_t[0]);
  }
  CHECK(acc / draws == Approx(5.0).epsilon(0.05));
}

TEST_CASE("surface: amplification power", "[ris_model]") {
  Rng rng(4);
  const int m = 3, n = 2, k = 1;
  const CMat H = rng.complex_normal(m, n);
  TransmitDesign tx{rng.complex_normal(n, k), rng.complex_normal(n, n)};

  CHECK(amplification_power(zeros(Protocol::kES, m), tx, H, 0.3) == 0.0);

  RisConfiguration c = random_feasible(Protocol::kES, m, 4.0, rng);
  const double s = c.theta_r.squaredNorm() + c.theta_t.squaredNorm();
  CHECK(amplification_power(c, TransmitDesign::zeros(n, k), H, 0.3) == Approx(0.3 * s).epsilon(1e-14));

  // E sum_d ||Theta_d (H X s + n_r)||^2 with unit-power symbols
  const double sigma_r2 = 0.5;
  const CMat X = tx.beams();
  double acc = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const CVec sym = rng.complex_normal(X.cols(), 1);
    const CVec nr = std::sqrt(sigma_r2) * rng.complex_normal(m, 1);
    const CVec y = H * X * sym + nr;
    for (Space d : kSpaces) acc += (c.theta(d).asDiagonal() * y).squaredNorm();
  }
  CHECK(acc / draws == Approx(amplification_power(c, tx, H, sigma_r2)).epsilon(0.02));
}
