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

// Limit quantities along the noise-free path X0. Every time integral is the
// left-endpoint Riemann sum delta * sum_{k=0}^{n-1} f(X0 segment at k), with
// the Dirac law at the segment itself.

#pragma once

#include "mvlse/model.hpp"

namespace mvlse {

/// b(zeta, mu, theta0) - b(zeta, mu, theta); tamed drifts when `taming` is given.
Vector gamma(const ModelSpec& model, const Segment& seg, const ParticleEnsemble& mu, const Vector& theta,
             const Vector& theta0);
Vector gamma(const ModelSpec& model, const Segment& seg, const ParticleEnsemble& mu, const Vector& theta,
             const Vector& theta0, double delta, const Taming& taming);

/// int_0^T Gamma^T sigma_hat Gamma dt.
double xi_theta(const ModelSpec& model, const DiscretePath& x0, const Vector& theta, const Vector& theta0);

/// int_0^T (grad b)^T sigma_hat (grad b) dt.
Matrix info_matrix(const ModelSpec& model, const DiscretePath& x0, const Vector& theta);

/// The contraction A o B = (A_1 B, ..., A_p B) of p x (p d) Hessian blocks with a d-vector.
Matrix circle_product(const Matrix& blocks, const Vector& b, int d);

/// -2 int_0^T (Hessian of b^T) o (sigma_hat Gamma) dt.
Matrix k_matrix(const ModelSpec& model, const DiscretePath& x0, const Vector& theta, const Vector& theta0);

/// (grad b)^T sigma_hat sigma, a p x m matrix.
Matrix upsilon(const ModelSpec& model, const Segment& seg, const ParticleEnsemble& mu, const Vector& theta0);

/// int_0^T Upsilon Upsilon^T dt.
Matrix upsilon_gram(const ModelSpec& model, const DiscretePath& x0, const Vector& theta0);

/// I^-1 (int Upsilon Upsilon^T dt) I^-1, the covariance of the Gaussian limit
/// of eps^-1 (theta_hat - theta0). Throws kNonIdentifiable for singular I.
Matrix limit_covariance(const ModelSpec& model, const DiscretePath& x0, const Vector& theta0);

struct LimitQuantities {
  Matrix info_at_theta0;
  Matrix limit_cov;
};

LimitQuantities limit_quantities(const ModelSpec& model, const DiscretePath& x0, const Vector& theta0);

}  // namespace mvlse
