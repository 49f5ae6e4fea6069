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

// Coefficient contract of a path- and law-dependent SDE
//
//   dX(t) = b(X_t, law(X_t), theta) dt + eps * sigma(X_t, law(X_t)) dB(t),
//
// the drift taming transform and the built-in scalar example model.

#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>

#include "mvlse/measure.hpp"
#include "mvlse/segment.hpp"

namespace mvlse {

using DriftFn = std::function<Vector(const Segment&, const ParticleEnsemble&, const Vector&)>;
using SigmaFn = std::function<Matrix(const Segment&, const ParticleEnsemble&)>;
using GradFn = std::function<Matrix(const Segment&, const ParticleEnsemble&, const Vector&)>;

/// Coefficients of the model. All callables must be pure and reentrant:
/// simulations call them from several threads at once.
struct ModelSpec {
  std::string name = "custom";
  int d = 1;  ///< state dimension
  int m = 1;  ///< noise dimension
  int p = 1;  ///< parameter dimension

  DriftFn drift;             ///< d-vector
  SigmaFn sigma;             ///< d x m
  GradFn grad_theta_drift;   ///< d x p, column j = d b / d theta_j
  /// p x (p*d): block k (columns k*d .. k*d+d-1) is d/d theta_k of the p x d
  /// matrix (grad_theta b)^T. Absent means finite differences.
  std::optional<GradFn> hess_theta_drift;
  /// drift(zeta, mu, theta) = drift(zeta, mu, 0) + grad * theta exactly.
  bool is_linear_in_theta = false;
};

/// Axis-aligned parameter box. Degenerate axes (lower == upper) pin a coordinate.
struct ThetaBox {
  Vector lower;
  Vector upper;

  ThetaBox() = default;
  ThetaBox(Vector lo, Vector hi);

  int dim() const noexcept { return static_cast<int>(lower.size()); }
  bool contains(const Vector& theta) const;
  Vector center() const { return 0.5 * (lower + upper); }
  Vector clamp(const Vector& theta) const;
};

/// Taming of the drift: b / (1 + delta^alpha |b|). Disabled means identity.
struct Taming {
  double alpha = 0.5;
  bool enabled = true;
};

/// Throws kParameter unless alpha is in (0, 1/2].
void check_alpha(double alpha);

Vector tame_drift(const Vector& b_val, double delta, double alpha);
Vector tame_drift(const Vector& b_val, double delta, const Taming& taming);

/// Gradient in theta of the tamed drift from the raw drift value and its
/// gradient. The correction term is zero when b = 0.
Matrix tamed_gradient(const Vector& b_val, const Matrix& grad_b, double delta, const Taming& taming);

Matrix grad_tamed_drift(const ModelSpec& model, const Segment& seg, const ParticleEnsemble& mu,
                        const Vector& theta, double delta, const Taming& taming);

/// (sigma sigma^T)^{-1}, symmetrised. Throws kNearSingularDiffusion above
/// condition number 1e12.
Matrix sigma_hat(const Matrix& sigma);
Matrix sigma_hat(const ModelSpec& model, const Segment& seg, const ParticleEnsemble& mu);

/// Hessian blocks in the layout of ModelSpec::hess_theta_drift, analytic when
/// available, else central differences of the gradient with step
/// 1e-5 * (1 + |theta|).
Matrix theta_hessian(const ModelSpec& model, const Segment& seg, const ParticleEnsemble& mu,
                     const Vector& theta);

/// b0(zeta, zeta') = -zeta(0)^3 + zeta(0) + int zeta + int zeta'.
double example_b0(const Segment& zeta, const Segment& zeta_prime);

/// Scalar example: b = theta1 + theta2 * int b0(zeta, .) dmu,
/// sigma = 1 + int |zeta|. Linear in theta with zero Hessian.
ModelSpec example_model(double r0);

struct GradientCheck {
  double max_rel_error = 0.0;
  bool passed = true;
};

/// Compares grad_theta_drift against central differences of drift on random
/// probes around theta, relative error tolerance `tol`.
GradientCheck validate_gradient(const ModelSpec& model, const Segment& seg, const ParticleEnsemble& mu,
                                const Vector& theta, std::mt19937_64& rng, int probes = 8,
                                double tol = 1e-5);

}  // namespace mvlse
