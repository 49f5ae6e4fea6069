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

#include "mvlse/model.hpp"

#include <cmath>
#include <sstream>

#include "mvlse/error.hpp"

namespace mvlse {

ThetaBox::ThetaBox(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw Error(ErrorKind::kParameter, "theta box bounds must have equal, nonzero length");
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower(i)) || !std::isfinite(upper(i)) || lower(i) > upper(i)) {
      throw Error(ErrorKind::kParameter, "theta box needs finite lower <= upper on every axis");
    }
  }
}

bool ThetaBox::contains(const Vector& theta) const {
  if (theta.size() != lower.size()) return false;
  return ((theta.array() >= lower.array()) && (theta.array() <= upper.array())).all();
}

Vector ThetaBox::clamp(const Vector& theta) const { return theta.cwiseMax(lower).cwiseMin(upper); }

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 0.5)) {
    std::ostringstream os;
    os << "taming exponent alpha=" << alpha << " must lie in (0, 1/2]";
    throw Error(ErrorKind::kParameter, os.str());
  }
}

Vector tame_drift(const Vector& b_val, double delta, double alpha) {
  check_alpha(alpha);
  if (!(delta > 0.0)) throw Error(ErrorKind::kParameter, "taming needs delta > 0");
  return b_val / (1.0 + std::pow(delta, alpha) * b_val.norm());
}

Vector tame_drift(const Vector& b_val, double delta, const Taming& taming) {
  return taming.enabled ? tame_drift(b_val, delta, taming.alpha) : b_val;
}

Matrix tamed_gradient(const Vector& b_val, const Matrix& grad_b, double delta, const Taming& taming) {
  if (!taming.enabled) return grad_b;
  check_alpha(taming.alpha);
  const double da = std::pow(delta, taming.alpha);
  const double norm = b_val.norm();
  const double denom = 1.0 + da * norm;
  Matrix out = grad_b / denom;
  if (norm > 0.0) {
    out -= (da / (norm * denom * denom)) * (b_val * (b_val.transpose() * grad_b));
  }
  return out;
}

Matrix grad_tamed_drift(const ModelSpec& model, const Segment& seg, const ParticleEnsemble& mu,
                        const Vector& theta, double delta, const Taming& taming) {
  return tamed_gradient(model.drift(seg, mu, theta), model.grad_theta_drift(seg, mu, theta), delta, taming);
}

Matrix sigma_hat(const Matrix& sigma) {
  const Matrix cov = sigma * sigma.transpose();
  if (cov.rows() == 1) {
    const double v = cov(0, 0);
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::kNearSingularDiffusion, "sigma sigma^T is not invertible");
    }
    return Matrix::Constant(1, 1, 1.0 / v);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const auto& ev = eig.eigenvalues();
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    std::ostringstream os;
    os << "sigma sigma^T is near singular (eigenvalues " << lo << ", " << hi << ")";
    throw Error(ErrorKind::kNearSingularDiffusion, os.str());
  }
  Matrix inv = eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (inv + inv.transpose());
}

Matrix sigma_hat(const ModelSpec& model, const Segment& seg, const ParticleEnsemble& mu) {
  return sigma_hat(model.sigma(seg, mu));
}

Matrix theta_hessian(const ModelSpec& model, const Segment& seg, const ParticleEnsemble& mu,
                     const Vector& theta) {
  if (model.hess_theta_drift) return (*model.hess_theta_drift)(seg, mu, theta);
  const int p = model.p;
  const int d = model.d;
  Matrix out(p, p * d);
  for (int k = 0; k < p; ++k) {
    const double h = 1e-5 * (1.0 + std::abs(theta(k)));
    Vector up = theta, dn = theta;
    up(k) += h;
    dn(k) -= h;
    const Matrix diff = (model.grad_theta_drift(seg, mu, up) - model.grad_theta_drift(seg, mu, dn)) / (2.0 * h);
    out.block(0, k * d, p, d) = diff.transpose();
  }
  return out;
}

namespace {

// -zeta(0)^3 + zeta(0) + int zeta, the part of b0 that depends on zeta alone.
double b0_own_part(const Segment& zeta) {
  const double head = zeta.scalar(zeta.steps());
  return -head * head * head + head + integrate(zeta)(0);
}

double mean_b0(const Segment& zeta, const ParticleEnsemble& mu) {
  double acc = 0.0;
  for (const auto& other : mu) acc += integrate(other)(0);
  return b0_own_part(zeta) + acc / static_cast<double>(mu.size());
}

}  // namespace

double example_b0(const Segment& zeta, const Segment& zeta_prime) {
  return b0_own_part(zeta) + integrate(zeta_prime)(0);
}

ModelSpec example_model(double r0) {
  if (!(r0 > 0.0)) throw Error(ErrorKind::kParameter, "example model needs r0 > 0");
  ModelSpec model;
  model.name = "example";
  model.d = 1;
  model.m = 1;
  model.p = 2;
  model.drift = [](const Segment& zeta, const ParticleEnsemble& mu, const Vector& theta) {
    Vector out(1);
    out(0) = theta(0) + theta(1) * mean_b0(zeta, mu);
    return out;
  };
  model.sigma = [](const Segment& zeta, const ParticleEnsemble&) {
    return Matrix::Constant(1, 1, 1.0 + integrate_abs(zeta));
  };
  model.grad_theta_drift = [](const Segment& zeta, const ParticleEnsemble& mu, const Vector&) {
    Matrix g(1, 2);
    g(0, 0) = 1.0;
    g(0, 1) = mean_b0(zeta, mu);
    return g;
  };
  model.hess_theta_drift = [](const Segment&, const ParticleEnsemble&, const Vector&) {
    return Matrix::Zero(2, 2);
  };
  model.is_linear_in_theta = true;
  return model;
}

GradientCheck validate_gradient(const ModelSpec& model, const Segment& seg, const ParticleEnsemble& mu,
                                const Vector& theta, std::mt19937_64& rng, int probes, double tol) {
  std::normal_distribution<double> normal(0.0, 1.0);
  GradientCheck result;
  for (int probe = 0; probe < probes; ++probe) {
    Vector th = theta;
    for (Eigen::Index i = 0; i < th.size(); ++i) th(i) += 0.1 * normal(rng);
    const Matrix analytic = model.grad_theta_drift(seg, mu, th);
    Matrix numeric(model.d, model.p);
    for (int k = 0; k < model.p; ++k) {
      const double h = 1e-6 * (1.0 + std::abs(th(k)));
      Vector up = th, dn = th;
      up(k) += h;
      dn(k) -= h;
      numeric.col(k) = (model.drift(seg, mu, up) - model.drift(seg, mu, dn)) / (2.0 * h);
    }
    const double rel = (analytic - numeric).norm() / std::max(1.0, analytic.norm());
    result.max_rel_error = std::max(result.max_rel_error, rel);
  }
  result.passed = result.max_rel_error <= tol;
  return result;
}

}  // namespace mvlse
