// Copyright 2026 The mvlse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>

#include "doctest.h"
#include "mvlse/error.hpp"
#include "mvlse/segment.hpp"
#include "support.hpp"

namespace mvlse {
namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kIo;
}

TEST_CASE("make_grid couples the step to the delay") {
  const GridSpec a = make_grid(1.0, 100, 0.1);
  CHECK(a.delta == 0.01);
  CHECK(a.M == 10);
  const GridSpec b = make_grid(2.0, 40, 0.5);
  CHECK(b.delta == 0.05);
  CHECK(b.M == 10);
  CHECK(b.path_length() == 51);
  CHECK(b.time_at(40) == 2.0);
  CHECK(kind_of([] { make_grid(1.0, 100, 0.007); }) == ErrorKind::kGridMismatch);
  CHECK(kind_of([] { make_grid(1.0, 0, 0.1); }) == ErrorKind::kGridMismatch);
  CHECK(kind_of([] { make_grid(-1.0, 10, 0.1); }) == ErrorKind::kGridMismatch);
}

TEST_CASE("floor_time") {
  CHECK(floor_time(0.123, 0.05) == doctest::Approx(0.10).epsilon(1e-15));
  CHECK(floor_time(0.10, 0.05) == doctest::Approx(0.10).epsilon(1e-15));
  CHECK(floor_time(0.0499999, 0.05) == 0.0);
}

TEST_CASE("segments reject bad shapes and non-finite entries") {
  CHECK_THROWS_AS(Segment(1, 0.1, {1.0, NAN}), Error);
  CHECK_THROWS_AS(Segment(2, 0.1, {1.0, 2.0, 3.0}), Error);
  const GridSpec g = make_grid(1.0, 10, 0.2);
  CHECK_THROWS_AS(DiscretePath(g, 1, std::vector<double>(5, 0.0)), Error);
}

TEST_CASE("interp_segment slices the observed points") {
  const GridSpec g = make_grid(1.0, 20, 0.2);
  std::vector<double> v(g.path_length());
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (auto& x : v) x = normal(rng);
  const DiscretePath path(g, 1, v);
  for (int k = 0; k <= g.n; ++k) {
    const Segment s = interp_segment(path, k);
    REQUIRE(s.steps() == g.M);
    // Value at time 0 is the observation itself, bit for bit.
    CHECK(eval_segment(s, 0.0)(0) == path.at(k)[0]);
    for (int i = 0; i <= g.M; ++i) CHECK(eval_segment(s, -i * g.delta)(0) == path.at(k - i)[0]);
  }
  CHECK(kind_of([&] { interp_segment(path, -1); }) == ErrorKind::kIndex);
  CHECK(kind_of([&] { interp_segment(path, g.n + 1); }) == ErrorKind::kIndex);
}

TEST_CASE("interpolated segment is linear between observations") {
  const GridSpec g = make_grid(1.0, 10, 0.1);
  std::vector<double> v(g.path_length(), 0.0);
  v[static_cast<std::size_t>(g.M + 5)] = 1.0;  // Y(5 delta) = 1, Y(4 delta) = 0
  const DiscretePath path(g, 1, v);
  const Segment s = interp_segment(path, 5);
  CHECK(eval_segment(s, -g.delta / 2)(0) == doctest::Approx(0.5));

  const DiscretePath flat(g, 1, std::vector<double>(g.path_length(), 2.5));
  const Segment c = interp_segment(flat, 7);
  for (double x : c.raw()) CHECK(x == 2.5);
}

TEST_CASE("eval_segment endpoints, midpoints and domain") {
  const Segment s(1, 0.05, {0.0, 2.0});
  CHECK(eval_segment(s, -0.05)(0) == 0.0);
  CHECK(eval_segment(s, 0.0)(0) == 2.0);
  CHECK(eval_segment(s, -0.05 / 4)(0) == doctest::Approx(1.5));
  CHECK(kind_of([&] { eval_segment(s, 0.01); }) == ErrorKind::kDomain);
  CHECK(kind_of([&] { eval_segment(s, -0.06); }) == ErrorKind::kDomain);
}

TEST_CASE("eval_segment is Lipschitz with the largest slope") {
  const Segment s(1, 0.1, {0.0, 1.0, -2.0, 0.5});
  const double lip = 3.0 / 0.1;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.3, 0.0);
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng), b = u(rng);
    CHECK(std::abs(eval_segment(s, a)(0) - eval_segment(s, b)(0)) <= lip * std::abs(a - b) + 1e-12);
  }
}

TEST_CASE("sup_norm") {
  CHECK(sup_norm(Segment(1, 0.1, {0.0, 0.0, 0.0})) == 0.0);
  CHECK(sup_norm(Segment(1, 0.1, {-3.0, 1.0, 2.0})) == 3.0);
  CHECK(sup_norm(Segment(2, 0.1, {3.0, 4.0, 0.0, 0.0})) == 5.0);
}

TEST_CASE("sup_norm of an interpolated segment is bounded by its nodes") {
  const GridSpec g = make_grid(1.0, 50, 0.1);
  std::vector<double> v(g.path_length());
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (auto& x : v) x = normal(rng);
  const DiscretePath path(g, 1, v);
  for (int k = 0; k <= g.n; ++k) {
    double m = 0.0;
    for (int i = k - g.M; i <= k; ++i) m = std::max(m, std::abs(path.at(i)[0]));
    CHECK(sup_norm(interp_segment(path, k)) <= m);
  }
}

TEST_CASE("segment integrals are exact on linear pieces") {
  const Segment s(1, 0.1, {1.0, -1.0, 3.0});
  CHECK(integrate(s)(0) == doctest::Approx(testing::trapezoid({1.0, -1.0, 3.0}, 0.1)));
  // |.| over a piece crossing zero: two triangles.
  CHECK(integrate_abs(s) == doctest::Approx(0.1 * (0.25 + 0.25) + 0.1 * (0.125 + 1.125)));
  CHECK(integrate(Segment::constant(1, 10, 0.01, Vector::Constant(1, 2.0)))(0) == doctest::Approx(0.2));
}

TEST_CASE("assemble_path keeps the initial segment") {
  const GridSpec g = make_grid(1.0, 10, 0.2);
  const Segment xi = testing::ramp(g);
  std::vector<double> fwd(10, 1.0);
  const DiscretePath p = assemble_path(g, xi, fwd);
  for (int i = 0; i <= g.M; ++i) CHECK(p.at(i - g.M)[0] == xi.scalar(i));
  CHECK(p.at(10)[0] == 1.0);
}

}  // namespace
}  // namespace mvlse
