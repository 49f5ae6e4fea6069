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
#include "mvlse/model.hpp"
#include "support.hpp"

namespace mvlse {
namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Segment constant_segment(double c, double r0, int M = 10) {
  return Segment::constant(1, M, r0 / M, Vector::Constant(1, c));
}

// d = 2, p = 2 model with nonlinear theta dependence, for gradient checks.
ModelSpec planar_model() {
  ModelSpec m;
  m.name = "planar";
  m.d = 2;
  m.m = 2;
  m.p = 2;
  m.drift = [](const Segment& z, const ParticleEnsemble&, const Vector& th) {
    return vec({th(0) * th(0) * z.scalar(0) + std::sin(th(1)), th(0) * th(1) - 3.0 * z.scalar(1)});
  };
  m.sigma = [](const Segment&, const ParticleEnsemble&) { return Matrix(Matrix::Identity(2, 2)); };
  m.grad_theta_drift = [](const Segment& z, const ParticleEnsemble&, const Vector& th) {
    Matrix g(2, 2);
    g << 2.0 * th(0) * z.scalar(0), std::cos(th(1)), th(1), th(0);
    return g;
  };
  return m;
}

TEST_CASE("tame_drift examples") {
  CHECK(tame_drift(vec({0.0}), 0.01, 0.5)(0) == 0.0);
  const double big = tame_drift(vec({1e6}), 0.01, 0.5)(0);
  CHECK(big == doctest::Approx(1e6 / (1.0 + 0.1 * 1e6)).epsilon(1e-15));
  CHECK(big <= 10.0);
  CHECK(tame_drift(vec({2.0}), 1e-8, 0.5)(0) == doctest::Approx(2.0 / (1.0 + 2e-4)).epsilon(1e-15));
  CHECK_THROWS_AS(tame_drift(vec({1.0}), 0.01, 0.7), Error);
  CHECK_THROWS_AS(tame_drift(vec({1.0}), 0.01, 0.0), Error);
  CHECK(tame_drift(vec({7.0}), 0.01, Taming{0.5, false})(0) == 7.0);
}

TEST_CASE("tame_drift shrinks along the drift direction") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal(0.0, 50.0);
  for (int i = 0; i < 500; ++i) {
    const Vector b = vec({normal(rng), normal(rng), normal(rng)});
    const Vector t = tame_drift(b, 1e-3, 0.5);
    CHECK(t.norm() <= b.norm());
    CHECK(Eigen::Vector3d(b).cross(Eigen::Vector3d(t)).norm() <= 1e-12 * b.norm() * t.norm());
    CHECK(b.dot(t) / (b.norm() * t.norm()) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("tamed gradient") {
  const ModelSpec m = planar_model();
  const Segment z(2, 0.1, {0.4, -0.2, 1.3, 0.7});
  const ParticleEnsemble mu = ParticleEnsemble::dirac(z);

  SUBCASE("zero drift leaves the gradient unchanged") {
    const Matrix g = tamed_gradient(Vector::Zero(2), Matrix::Ones(2, 2) * 3.0, 0.01, Taming{});
    CHECK((g - Matrix::Ones(2, 2) * 3.0).norm() == 0.0);
  }
  SUBCASE("tiny steps recover the raw gradient") {
    const Vector th = vec({0.8, -0.4});
    const Matrix raw = m.grad_theta_drift(z, mu, th);
    const double b = m.drift(z, mu, th).norm();
    for (double delta : {1e-6, 1e-8, 1e-10}) {
      const Matrix tamed = grad_tamed_drift(m, z, mu, th, delta, Taming{});
      // Both correction terms are at most delta^alpha |b| |grad b|.
      CHECK((tamed - raw).norm() <= 2.0 * std::sqrt(delta) * b * raw.norm());
    }
    // With a drift of size 0.05 the gap at delta = 1e-10 is below 1e-6.
    const Vector small = m.drift(z, mu, th) * (0.05 / b);
    const Matrix g = tamed_gradient(small, raw, 1e-10, Taming{});
    CHECK((g - raw).norm() <= 1e-6 * raw.norm());
  }
  SUBCASE("finite differences of the tamed drift") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> normal;
    for (int probe = 0; probe < 50; ++probe) {
      const Vector th = vec({normal(rng), normal(rng)});
      const double delta = 0.01;
      const Matrix analytic = grad_tamed_drift(m, z, mu, th, delta, Taming{});
      Matrix fd(2, 2);
      for (int k = 0; k < 2; ++k) {
        const double h = 1e-6;
        Vector up = th, dn = th;
        up(k) += h;
        dn(k) -= h;
        fd.col(k) = (tame_drift(m.drift(z, mu, up), delta, 0.5) - tame_drift(m.drift(z, mu, dn), delta, 0.5)) /
                    (2.0 * h);
      }
      CHECK((analytic - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
    }
  }
}

TEST_CASE("sigma_hat inverts sigma sigma^T") {
  CHECK(sigma_hat(Matrix::Constant(1, 1, 2.0))(0, 0) == 0.25);
  CHECK((sigma_hat(Matrix(Matrix::Identity(3, 3))) - Matrix::Identity(3, 3)).norm() <= 1e-15);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 3.0;
  const Matrix s = sigma_hat(d);
  CHECK(s(0, 0) == doctest::Approx(1.0));
  CHECK(s(1, 1) == doctest::Approx(1.0 / 9.0));
  CHECK(std::abs(s(0, 1)) <= 1e-15);

  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 100; ++i) {
    Matrix sig(3, 2);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 2; ++c) sig(r, c) = normal(rng);
    Matrix sq(3, 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) sq(r, c) = normal(rng);
    const Matrix sh = sigma_hat(sq);
    CHECK((sh - sh.transpose()).norm() == 0.0);
    CHECK((sh * (sq * sq.transpose()) - Matrix::Identity(3, 3)).norm() <= 1e-10 * std::max(1.0, sh.norm()));
  }
  Matrix sing = Matrix::Zero(2, 2);
  sing(0, 0) = 1.0;
  sing(1, 1) = 1e-7;
  try {
    sigma_hat(sing);
    FAIL("expected near-singular diffusion");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNearSingularDiffusion);
  }
  CHECK_THROWS_AS(sigma_hat(Matrix::Zero(1, 1)), Error);
}

TEST_CASE("example b0 on constant paths") {
  CHECK(example_b0(constant_segment(0.0, 0.1), constant_segment(0.0, 0.1)) == 0.0);
  CHECK(example_b0(constant_segment(1.0, 0.1), constant_segment(0.0, 0.1)) == doctest::Approx(0.1));
  CHECK(example_b0(constant_segment(2.0, 0.5), constant_segment(2.0, 0.5)) == doctest::Approx(-4.0));
}

TEST_CASE("example model coefficients") {
  const ModelSpec m = example_model(0.1);
  CHECK(m.d == 1);
  CHECK(m.m == 1);
  CHECK(m.p == 2);
  CHECK(m.is_linear_in_theta);
  const Segment one = constant_segment(1.0, 0.1);
  const ParticleEnsemble mu = ParticleEnsemble::dirac(one);
  CHECK(m.drift(one, mu, vec({0.5, 2.0}))(0) == doctest::Approx(0.9));
  CHECK(m.drift(one, mu, vec({0.0, 0.0}))(0) == 0.0);
  CHECK(m.sigma(constant_segment(0.0, 0.1), mu)(0, 0) == 1.0);
  CHECK(m.sigma(one, mu)(0, 0) == doctest::Approx(1.1));
  CHECK(example_model(0.1).hess_theta_drift.has_value());
  CHECK_THROWS_AS(example_model(0.0), Error);
}

TEST_CASE("example drift matches the raw-value oracle") {
  const ModelSpec m = example_model(0.2);
  std::mt19937_64 rng(31);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Segment> segs;
    std::vector<std::vector<double>> raw;
    for (int j = 0; j < 5; ++j) {
      std::vector<double> v(11);
      for (auto& x : v) x = normal(rng);
      raw.push_back(v);
      segs.emplace_back(1, 0.02, v);
    }
    const ParticleEnsemble mu(segs);
    const Vector th = vec({normal(rng), normal(rng)});
    CHECK(m.drift(segs[0], mu, th)(0) ==
          doctest::Approx(testing::example_drift_oracle(raw[0], raw, 0.02, th(0), th(1))).epsilon(1e-12));
  }
}

TEST_CASE("example drift is affine in theta with a theta-free gradient") {
  const ModelSpec m = example_model(0.1);
  const GridSpec g = make_grid(1.0, 10, 0.1);
  const Segment z = testing::ramp(g, 2.0);
  const ParticleEnsemble mu({z, testing::ramp(g, -1.0)});
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal;
  const Vector b0 = m.drift(z, mu, Vector::Zero(2));
  for (int i = 0; i < 50; ++i) {
    const Vector a = vec({normal(rng), normal(rng)}), b = vec({normal(rng), normal(rng)});
    const double lhs = m.drift(z, mu, a + b)(0) - b0(0);
    const double rhs = (m.drift(z, mu, a)(0) - b0(0)) + (m.drift(z, mu, b)(0) - b0(0));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    CHECK((m.grad_theta_drift(z, mu, a) - m.grad_theta_drift(z, mu, b)).norm() == 0.0);
  }
}

TEST_CASE("validate_gradient flags wrong gradients") {
  const ModelSpec good = example_model(0.1);
  const GridSpec g = make_grid(1.0, 10, 0.1);
  const Segment z = testing::ramp(g);
  const ParticleEnsemble mu = ParticleEnsemble::dirac(z);
  std::mt19937_64 rng(1);
  CHECK(validate_gradient(good, z, mu, testing::theta0(), rng, 16).passed);
  ModelSpec bad = good;
  bad.grad_theta_drift = [](const Segment&, const ParticleEnsemble&, const Vector&) {
    return Matrix(Matrix::Ones(1, 2));
  };
  CHECK_FALSE(validate_gradient(bad, z, mu, testing::theta0(), rng, 16).passed);
}

TEST_CASE("theta Hessian by differences vanishes for the example") {
  ModelSpec m = example_model(0.1);
  m.hess_theta_drift.reset();
  const GridSpec g = make_grid(1.0, 10, 0.1);
  const Segment z = testing::ramp(g);
  CHECK(theta_hessian(m, z, ParticleEnsemble::dirac(z), testing::theta0()).norm() <= 1e-9);
}

TEST_CASE("theta box") {
  const ThetaBox box = testing::unit_box();
  CHECK(box.contains(vec({0.0, 1.0})));
  CHECK_FALSE(box.contains(vec({1.1, 0.5})));
  CHECK((box.clamp(vec({2.0, -1.0})) - vec({1.0, 0.0})).norm() == 0.0);
  CHECK_THROWS_AS(ThetaBox(vec({1.0}), vec({0.0})), Error);
  CHECK_NOTHROW(ThetaBox(vec({0.5}), vec({0.5})));
}

}  // namespace
}  // namespace mvlse
