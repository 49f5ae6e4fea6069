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

#include "mvlse/asymptotics.hpp"

#include <sstream>

#include "mvlse/error.hpp"

namespace mvlse {

namespace {

// delta * sum_{k=0}^{n-1} f(segment_k, dirac_k).
template <typename F>
auto riemann_sum(const DiscretePath& x0, F&& f) {
  const GridSpec& g = x0.grid();
  auto seg = interp_segment(x0, 0);
  auto acc = f(seg, ParticleEnsemble::dirac(seg));
  for (int k = 1; k < g.n; ++k) {
    seg = interp_segment(x0, k);
    acc += f(seg, ParticleEnsemble::dirac(seg));
  }
  return decltype(acc)(acc * g.delta);
}

}  // namespace

Vector gamma(const ModelSpec& model, const Segment& seg, const ParticleEnsemble& mu, const Vector& theta,
             const Vector& theta0) {
  return model.drift(seg, mu, theta0) - model.drift(seg, mu, theta);
}

Vector gamma(const ModelSpec& model, const Segment& seg, const ParticleEnsemble& mu, const Vector& theta,
             const Vector& theta0, double delta, const Taming& taming) {
  return tame_drift(model.drift(seg, mu, theta0), delta, taming) -
         tame_drift(model.drift(seg, mu, theta), delta, taming);
}

double xi_theta(const ModelSpec& model, const DiscretePath& x0, const Vector& theta, const Vector& theta0) {
  return riemann_sum(x0, [&](const Segment& seg, const ParticleEnsemble& mu) {
    const Vector g = gamma(model, seg, mu, theta, theta0);
    return g.dot(sigma_hat(model, seg, mu) * g);
  });
}

Matrix info_matrix(const ModelSpec& model, const DiscretePath& x0, const Vector& theta) {
  Matrix info = riemann_sum(x0, [&](const Segment& seg, const ParticleEnsemble& mu) -> Matrix {
    const Matrix grad = model.grad_theta_drift(seg, mu, theta);
    return grad.transpose() * sigma_hat(model, seg, mu) * grad;
  });
  return 0.5 * (info + info.transpose());
}

Matrix circle_product(const Matrix& blocks, const Vector& b, int d) {
  const auto p = blocks.rows();
  Matrix out(p, p);
  for (Eigen::Index j = 0; j < p; ++j) out.col(j) = blocks.block(0, j * d, p, d) * b;
  return out;
}

Matrix k_matrix(const ModelSpec& model, const DiscretePath& x0, const Vector& theta, const Vector& theta0) {
  return -2.0 * riemann_sum(x0, [&](const Segment& seg, const ParticleEnsemble& mu) -> Matrix {
    const Vector weighted = sigma_hat(model, seg, mu) * gamma(model, seg, mu, theta, theta0);
    return circle_product(theta_hessian(model, seg, mu, theta), weighted, model.d);
  });
}

Matrix upsilon(const ModelSpec& model, const Segment& seg, const ParticleEnsemble& mu, const Vector& theta0) {
  const Matrix sigma = model.sigma(seg, mu);
  return model.grad_theta_drift(seg, mu, theta0).transpose() * sigma_hat(sigma) * sigma;
}

Matrix upsilon_gram(const ModelSpec& model, const DiscretePath& x0, const Vector& theta0) {
  Matrix gram = riemann_sum(x0, [&](const Segment& seg, const ParticleEnsemble& mu) -> Matrix {
    const Matrix u = upsilon(model, seg, mu, theta0);
    return u * u.transpose();
  });
  return 0.5 * (gram + gram.transpose());
}

Matrix limit_covariance(const ModelSpec& model, const DiscretePath& x0, const Vector& theta0) {
  const Matrix info = info_matrix(model, x0, theta0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(info);
  const auto& ev = eig.eigenvalues();
  if (!(ev.minCoeff() > 1e-12 * std::max(1.0, ev.maxCoeff()))) {
    std::ostringstream os;
    os << "information matrix is singular (eigenvalues " << ev.transpose() << ")";
    throw Error(ErrorKind::kNonIdentifiable, os.str());
  }
  const Matrix inv = info.llt().solve(Matrix::Identity(info.rows(), info.cols()));
  const Matrix cov = inv * upsilon_gram(model, x0, theta0) * inv;
  return 0.5 * (cov + cov.transpose());
}

LimitQuantities limit_quantities(const ModelSpec& model, const DiscretePath& x0, const Vector& theta0) {
  return {info_matrix(model, x0, theta0), limit_covariance(model, x0, theta0)};
}

}  // namespace mvlse
