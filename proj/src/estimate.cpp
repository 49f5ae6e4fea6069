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

#include "mvlse/estimate.hpp"

#include <cmath>
#include <sstream>

#include "mvlse/error.hpp"

namespace mvlse {

std::string_view to_string(EstimationMethod method) noexcept {
  switch (method) {
    case EstimationMethod::kGrid: return "grid";
    case EstimationMethod::kNelderMead: return "nelder-mead";
    case EstimationMethod::kClosedForm: return "closed-form";
  }
  return "unknown";
}

EstimationMethod estimation_method_from_string(std::string_view text) {
  if (text == "grid") return EstimationMethod::kGrid;
  if (text == "nelder-mead") return EstimationMethod::kNelderMead;
  if (text == "closed-form") return EstimationMethod::kClosedForm;
  throw Error(ErrorKind::kConfig, "unknown estimation method '" + std::string(text) + "'");
}

Contrast::Contrast(const ObservationSet& obs, const ModelSpec& model)
    : model_(&model),
      n_(obs.path.grid().n),
      delta_(obs.path.grid().delta),
      epsilon_(obs.epsilon),
      taming_(obs.taming),
      linear_(model.is_linear_in_theta) {
  if (obs.path.dim() != model.d) throw Error(ErrorKind::kDomain, "observation dimension differs from the model");
  if (obs.law.grid() != obs.path.grid()) throw Error(ErrorKind::kDomain, "law provider lives on a different grid");
  if (taming_.enabled) check_alpha(taming_.alpha);
  steps_.reserve(static_cast<std::size_t>(n_));
  const Vector zero = Vector::Zero(model.p);
  for (int k = 1; k <= n_; ++k) {
    Segment seg = interp_segment(obs.path, k - 1);
    ParticleEnsemble law = obs.law.law_at(k - 1);
    Vector inc = obs.path.at_vector(k) - obs.path.at_vector(k - 1);
    Matrix w = sigma_hat(model, seg, law);
    Vector b0;
    Matrix g;
    if (linear_) {
      b0 = model.drift(seg, law, zero);
      g = model.grad_theta_drift(seg, law, zero);
    }
    steps_.push_back(Step{std::move(seg), std::move(law), std::move(inc), std::move(w), std::move(b0), std::move(g)});
  }
}

Vector Contrast::drift(const Vector& theta, int k) const {
  const Step& s = steps_[k - 1];
  if (linear_) return s.drift_at_zero + s.gradient * theta;
  return model_->drift(s.segment, s.law, theta);
}

Vector Contrast::tamed_drift(const Vector& theta, int k) const {
  return tame_drift(drift(theta, k), delta_, taming_);
}

Matrix Contrast::tamed_gradient(const Vector& theta, int k) const {
  const Step& s = steps_[k - 1];
  const Matrix g = linear_ ? s.gradient : model_->grad_theta_drift(s.segment, s.law, theta);
  return mvlse::tamed_gradient(drift(theta, k), g, delta_, taming_);
}

Vector Contrast::residual(const Vector& theta, int k) const {
  if (k < 1 || k > n_) throw Error(ErrorKind::kIndex, "residual index outside [1, n]");
  return steps_[k - 1].increment - tamed_drift(theta, k) * delta_;
}

double Contrast::weighted_sum(const Vector& theta) const {
  double acc = 0.0;
  for (int k = 1; k <= n_; ++k) {
    const Vector r = residual(theta, k);
    acc += r.dot(steps_[k - 1].sigma_hat * r);
  }
  return acc / delta_;
}

double Contrast::psi(const Vector& theta) const {
  if (!(epsilon_ > 0.0)) throw Error(ErrorKind::kParameter, "Psi needs epsilon > 0");
  return weighted_sum(theta) / (epsilon_ * epsilon_);
}

double Contrast::phi(const Vector& theta, const Vector& theta0) const {
  return weighted_sum(theta) - weighted_sum(theta0);
}

double Contrast::phi_decomposition(const Vector& theta, const Vector& theta0) const {
  double cross = 0.0;
  double quad = 0.0;
  for (int k = 1; k <= n_; ++k) {
    const Matrix& w = steps_[k - 1].sigma_hat;
    const Vector gamma = tamed_drift(theta0, k) - tamed_drift(theta, k);
    const Vector p0 = residual(theta0, k);
    cross += gamma.dot(w * p0);
    quad += gamma.dot(w * gamma);
  }
  return 2.0 * cross + delta_ * quad;
}

Vector Contrast::grad_phi(const Vector& theta) const {
  Vector acc = Vector::Zero(model_->p);
  for (int k = 1; k <= n_; ++k) {
    acc += tamed_gradient(theta, k).transpose() * (steps_[k - 1].sigma_hat * residual(theta, k));
  }
  return -2.0 * acc;
}

Vector Contrast::grad_phi_scaled(const Vector& theta) const {
  if (!(epsilon_ > 0.0)) throw Error(ErrorKind::kParameter, "scaled gradient needs epsilon > 0");
  return grad_phi(theta) / epsilon_;
}

Vector residual(const ObservationSet& obs, const ModelSpec& model, const Vector& theta, int k) {
  const GridSpec& g = obs.path.grid();
  if (k < 1 || k > g.n) throw Error(ErrorKind::kIndex, "residual index outside [1, n]");
  const Segment seg = interp_segment(obs.path, k - 1);
  const ParticleEnsemble law = obs.law.law_at(k - 1);
  const Vector inc = obs.path.at_vector(k) - obs.path.at_vector(k - 1);
  return inc - tame_drift(model.drift(seg, law, theta), g.delta, obs.taming) * g.delta;
}

double contrast(const ObservationSet& obs, const ModelSpec& model, const Vector& theta) {
  return Contrast(obs, model).psi(theta);
}

Vector grad_contrast_phi(const ObservationSet& obs, const ModelSpec& model, const Vector& theta) {
  return Contrast(obs, model).grad_phi(theta);
}

EstimationResult lse_minimize(const Contrast& contrast, const ThetaBox& box, EstimationMethod method,
                              const EstimatorOptions& options) {
  const Objective f = [&contrast](const Vector& theta) { return contrast.weighted_sum(theta); };
  OptimizeResult opt;
  switch (method) {
    case EstimationMethod::kGrid: opt = minimize_grid(f, box, options.grid); break;
    case EstimationMethod::kNelderMead: opt = minimize_nelder_mead(f, box, options.nelder_mead); break;
    case EstimationMethod::kClosedForm:
      throw Error(ErrorKind::kParameter, "closed-form estimation is not a box minimiser");
  }
  EstimationResult result;
  result.theta_hat = opt.x;
  const double eps2 = contrast.epsilon() * contrast.epsilon();
  result.contrast_value = eps2 > 0.0 ? opt.value / eps2 : opt.value;
  result.method = method;
  result.evaluations = opt.evaluations;
  result.converged = opt.converged;
  result.boundary_hit = opt.boundary_hit;
  return result;
}

EstimationResult lse_minimize(const ObservationSet& obs, const ModelSpec& model, const ThetaBox& box,
                              EstimationMethod method, const EstimatorOptions& options) {
  if (box.dim() != model.p) throw Error(ErrorKind::kParameter, "theta box dimension differs from the model");
  return lse_minimize(Contrast(obs, model), box, method, options);
}

Vector closed_form_from_sums(const NormalSums& s, double delta) {
  const double det = s.a1 * s.a5 - s.a4 * s.a4;
  if (!(std::abs(det) > 1e-12 * std::abs(s.a1 * s.a5))) {
    std::ostringstream os;
    os << "singular design: A1 A5 - A4^2 = " << det;
    throw Error(ErrorKind::kSingularDesign, os.str());
  }
  Vector theta(2);
  theta(0) = (s.a2 * s.a5 - s.a3 * s.a4) / (delta * det);
  theta(1) = (s.a1 * s.a3 - s.a2 * s.a4) / (delta * det);
  return theta;
}

namespace {

void require_closed_form_model(const ModelSpec& model) {
  if (!model.is_linear_in_theta || model.p != 2 || model.d != 1) {
    throw Error(ErrorKind::kParameter, "closed form needs a scalar model linear in a 2-dimensional theta");
  }
}

}  // namespace

NormalSums Contrast::normal_sums() const {
  require_closed_form_model(*model_);
  NormalSums s;
  for (const Step& st : steps_) {
    const double w = st.sigma_hat(0, 0);
    const double g1 = st.gradient(0, 0), g2 = st.gradient(0, 1);
    const double dy = st.increment(0) - st.drift_at_zero(0) * delta_;
    s.a1 += w * g1 * g1;
    s.a2 += w * g1 * dy;
    s.a3 += w * g2 * dy;
    s.a4 += w * g1 * g2;
    s.a5 += w * g2 * g2;
  }
  return s;
}

NormalSums normal_sums(const ObservationSet& obs, const ModelSpec& model) {
  require_closed_form_model(model);
  return Contrast(obs, model).normal_sums();
}

EstimationResult closed_form_linear_lse(const Contrast& contrast) {
  EstimationResult result;
  result.theta_hat = closed_form_from_sums(contrast.normal_sums(), contrast.delta());
  double ws = 0.0;
  for (int k = 1; k <= contrast.steps(); ++k) {
    const Vector r = contrast.increment(k) - contrast.drift(result.theta_hat, k) * contrast.delta();
    ws += r.dot(contrast.weight(k) * r);
  }
  ws /= contrast.delta();
  const double eps2 = contrast.epsilon() * contrast.epsilon();
  result.contrast_value = eps2 > 0.0 ? ws / eps2 : ws;
  result.method = EstimationMethod::kClosedForm;
  result.evaluations = 1;
  result.converged = true;
  return result;
}

EstimationResult closed_form_linear_lse(const ObservationSet& obs, const ModelSpec& model) {
  require_closed_form_model(model);
  return closed_form_linear_lse(Contrast(obs, model));
}

}  // namespace mvlse
