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

#include "mfris/conic.hpp"
#include "mfris/rng.hpp"

using namespace mfris;
using Catch::Approx;

TEST_CASE("conic: min x subject to x >= 1", "[conic]") {
  ConicBuilder b;
  const int x = b.add_variables(1);
  b.set_objective(x, 1.0);
  AffineRow r;
  r.add(x, 1.0).constant = -1.0;
  b.add_nonneg(r);
  const auto sol = solve(std::move(b).build());
  REQUIRE(sol.status == SolveStatus::kOptimal);
  CHECK(sol.x[0] == Approx(1.0).margin(1e-8));
  CHECK(sol.objective == Approx(1.0).margin(1e-8));
}

TEST_CASE("conic: min norm with fixed vector", "[conic]") {
  const RVec c = (RVec(3) << 3.0, -4.0, 12.0).finished();
  ConicBuilder b;
  const int t = b.add_variables(1);
  const int y = b.add_variables(3);
  b.set_objective(t, 1.0);
  std::vector<AffineRow> rows;
  rows.push_back(AffineRow{}.add(t, 1.0));
  for (int i = 0; i < 3; ++i) {
    rows.push_back(AffineRow{}.add(y + i, 1.0));
    AffineRow eq;
    eq.add(y + i, 1.0).constant = -c[i];
    b.add_equality(eq);
  }
  b.add_soc(rows);
  const auto prog = std::move(b).build();
  const auto sol = solve(prog);
  REQUIRE(sol.status == SolveStatus::kOptimal);
  CHECK(sol.objective == Approx(13.0).epsilon(1e-8));
  CHECK(sol.max_violation <= 1e-8);
  CHECK(std::abs(prog.evaluate_objective(sol.x) - sol.objective) <= 1e-8);
}

TEST_CASE("conic: infeasible and unbounded programs are classified", "[conic]") {
  {
    ConicBuilder b;
    const int x = b.add_variables(1);
    b.set_objective(x, 1.0);
    b.add_nonneg(AffineRow{{{x, 1.0}}, -2.0}, "lo");
    b.add_nonneg(AffineRow{{{x, -1.0}}, 1.0}, "hi");
    CHECK(solve(std::move(b).build()).status == SolveStatus::kInfeasible);
  }
  {
    ConicBuilder b;
    const int x = b.add_variables(1);
    b.set_objective(x, -1.0);
    b.add_nonneg(AffineRow{{{x, 1.0}}, 0.0});
    CHECK(solve(std::move(b).build()).status == SolveStatus::kUnbounded);
  }
}

// Random two-variable SOCP: minimize c'x over an intersection of a disc, a
// rotated cone and a half-plane, checked against a dense grid.
TEST_CASE("conic: two-variable SOCP matches grid search", "[conic]") {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const double cx = rng.uniform(-1, 1), cy = rng.uniform(-1, 1);
    const double ox = rng.uniform(-0.3, 0.3), oy = rng.uniform(-0.3, 0.3);
    const double radius = rng.uniform(0.8, 1.2);
    const double a = rng.uniform(-1, 1), bb = rng.uniform(-1, 1);

    ConicBuilder b;
    const int x = b.add_variables(2);
    b.set_objective(x, cx);
    b.set_objective(x + 1, cy);
    // ||(x - o)|| <= radius
    b.add_soc({AffineRow{{}, radius}, AffineRow{{{x, 1.0}}, -ox}, AffineRow{{{x + 1, 1.0}}, -oy}});
    // x0^2 <= 2 (x1 + 1.5) * 1  (rotated)
    b.add_rotated_soc({AffineRow{{{x + 1, 1.0}}, 1.5}, AffineRow{{}, 1.0}, AffineRow{{{x, 1.0}}, 0.0}});
    // a x0 + b x1 <= 0.5
    b.add_nonneg(AffineRow{{{x, -a}, {x + 1, -bb}}, 0.5});
    const auto prog = std::move(b).build();
    const auto sol = solve(prog);
    REQUIRE(sol.status == SolveStatus::kOptimal);

    double best = 1e300;
    const int steps = 1500;
    for (int i = 0; i <= steps; ++i) {
      for (int j = 0; j <= steps; ++j) {
        const double px = ox - radius + 2 * radius * i / steps;
        const double py = oy - radius + 2 * radius * j / steps;
        if (std::hypot(px - ox, py - oy) > radius) continue;
        if (px * px > 2 * (py + 1.5)) continue;
        if (a * px + bb * py > 0.5) continue;
        best = std::min(best, cx * px + cy * py);
      }
    }
    CHECK(sol.objective <= best + 1e-9);
    CHECK(best - sol.objective <= 1e-4 * std::max(1.0, std::abs(best)) + 2e-3 * std::hypot(cx, cy));
    CHECK(sol.max_violation <= 1e-8);
    CHECK(sol.dual_objective <= sol.objective + 1e-7);
  }
}

TEST_CASE("conic: quadratic constraint via rotated cone", "[conic]") {
  // max a'x s.t. x'Qx <= 1  ->  optimum sqrt(a'Q^{-1}a)
  Rng rng(3);
  const int n = 4;
  RMat M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = rng.normal();
  const RMat Q = M * M.transpose() + RMat::Identity(n, n);
  RVec a(n);
  for (int i = 0; i < n; ++i) a[i] = rng.normal();
  Eigen::LLT<RMat> llt(Q);
  const RMat R = llt.matrixU();
  ConicBuilder b;
  const int x = b.add_variables(n);
  std::vector<int> vars;
  for (int i = 0; i < n; ++i) {
    b.set_objective(x + i, -a[i]);
    vars.push_back(x + i);
  }
  b.add_quadratic_le(R, vars, AffineRow{{}, 1.0});
  const auto sol = solve(std::move(b).build());
  REQUIRE(sol.status == SolveStatus::kOptimal);
  const double expected = std::sqrt(a.dot(Q.ldlt().solve(a)));
  CHECK(-sol.objective == Approx(expected).epsilon(1e-7));
}

TEST_CASE("conic: complex lifting identities", "[conic]") {
  Rng rng(11);
  const int n = 5;
  SECTION("identity form") {
    const RMat R = lift_complex_quadratic(CMat::Identity(2, 2));
    for (int t = 0; t < 10; ++t) {
      const CVec x = rng.complex_normal(2, 1);
      RVec xr(4);
      xr << x.real(), x.imag();
      CHECK((R * xr).squaredNorm() == Approx(x.squaredNorm()).epsilon(1e-12));
    }
  }
  SECTION("rank one form") {
    const CVec v = rng.complex_normal(n, 1);
    const RMat R = lift_complex_quadratic(v * v.adjoint());
    for (int t = 0; t < 20; ++t) {
      const CVec x = rng.complex_normal(n, 1);
      RVec xr(2 * n);
      xr << x.real(), x.imag();
      CHECK((R * xr).norm() == Approx(std::abs(v.dot(x))).epsilon(1e-9));
    }
  }
  SECTION("random PSD form") {
    const CMat Z = rng.complex_normal(n, n + 2);
    const CMat Q = Z * Z.adjoint();
    const RMat R = lift_complex_quadratic(Q);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      const CVec x = rng.complex_normal(n, 1);
      RVec xr(2 * n);
      xr << x.real(), x.imag();
      const double q = (x.adjoint() * Q * x)(0, 0).real();
      worst = std::max(worst, std::abs((R * xr).squaredNorm() - q) / q);
    }
    CHECK(worst <= 1e-9);
  }
  SECTION("non-Hermitian input throws") {
    CMat Q = CMat::Identity(2, 2);
    Q(0, 1) = 0.5;
    CHECK_THROWS_AS(lift_complex_quadratic(Q), SolverError);
  }
  SECTION("linear lifting") {
    const CMat L = rng.complex_normal(3, n);
    const CVec x = rng.complex_normal(n, 1);
    RVec xr(2 * n);
    xr << x.real(), x.imag();
    const RVec y = lift_complex_linear(L) * xr;
    const CVec ref = L * x;
    CHECK((y.head(3) - ref.real()).norm() <= 1e-12);
    CHECK((y.tail(3) - ref.imag()).norm() <= 1e-12);
  }
}

TEST_CASE("conic: program dump lists every block", "[conic]") {
  ConicBuilder b;
  const int x = b.add_variables(2);
  b.set_objective(x, 1.0);
  b.add_nonneg(AffineRow{{{x, 1.0}}, 0.0}, "pos");
  b.add_soc({AffineRow{{}, 1.0}, AffineRow{{{x + 1, 1.0}}, 0.0}}, "ball");
  std::ostringstream os;
  dump_program(b.program(), os);
  const std::string s = os.str();
  CHECK(s.find("variables 2") != std::string::npos);
  CHECK(s.find("cone nonneg 1 pos") != std::string::npos);
  CHECK(s.find("cone soc 2 ball") != std::string::npos);
}

TEST_CASE("conic: solve is deterministic", "[conic]") {
  auto make = [] {
    ConicBuilder b;
    const int x = b.add_variables(3);
    b.set_objective(x, 1.0);
    b.set_objective(x + 1, -0.5);
    b.add_soc({AffineRow{{}, 2.0}, AffineRow{{{x, 1.0}}, 0.0}, AffineRow{{{x + 1, 1.0}, {x + 2, 1.0}}, 0.0}});
    b.add_nonneg(AffineRow{{{x + 2, 1.0}}, 0.2});
    return std::move(b).build();
  };
  const auto s1 = solve(make());
  const auto s2 = solve(make());
  REQUIRE(s1.status == SolveStatus::kOptimal);
  CHECK(s1.x == s2.x);
}
