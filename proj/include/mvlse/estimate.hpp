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

// Least-squares contrast built from discrete observations and its minimisers.
//
// With residuals P_k(theta) = Y(k delta) - Y((k-1) delta) - b_tamed(Ybar_{k-1}, L_{k-1}, theta) delta
// the contrast is
//
//   Psi(theta) = eps^-2 delta^-1 sum_k P_k^T sigma_hat(Ybar_{k-1}) P_k,
//
// and Phi(theta) = eps^2 (Psi(theta) - Psi(theta0)). The estimator minimises
// the eps-free weighted sum eps^2 Psi, which has the same minimiser.

#pragma once

#include <string_view>
#include <vector>

#include "mvlse/optimize.hpp"
#include "mvlse/simulate.hpp"

namespace mvlse {

struct ObservationSet {
  DiscretePath path;
  LawProvider law;
  double epsilon = 0.01;
  Taming taming{};
};

enum class EstimationMethod { kGrid, kNelderMead, kClosedForm };

std::string_view to_string(EstimationMethod method) noexcept;
EstimationMethod estimation_method_from_string(std::string_view text);

struct EstimationResult {
  Vector theta_hat;
  /// Psi at theta_hat; eps^2 Psi when epsilon is zero.
  double contrast_value = 0.0;
  EstimationMethod method = EstimationMethod::kNelderMead;
  long evaluations = 0;
  bool converged = false;
  bool boundary_hit = false;
};

/// Weighted normal-equation sums of the two-parameter scalar linear model,
/// with w_k = sigma_hat_k, g_k = grad b and dY the drift-offset increment:
/// A1 = sum w g1^2, A2 = sum w g1 dY, A3 = sum w g2 dY, A4 = sum w g1 g2,
/// A5 = sum w g2^2.
struct NormalSums {
  double a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0, a5 = 0.0;
};

/// Frozen per-step quantities of an observation set: segments, laws, weights
/// and, for models linear in theta, the affine drift decomposition. Every
/// evaluation below is pure and may run concurrently.
class Contrast {
 public:
  Contrast(const ObservationSet& obs, const ModelSpec& model);

  int steps() const noexcept { return n_; }
  double delta() const noexcept { return delta_; }
  double epsilon() const noexcept { return epsilon_; }

  /// Raw drift b(Ybar_{k-1}, L_{k-1}, theta), 1 <= k <= n.
  Vector drift(const Vector& theta, int k) const;
  Vector tamed_drift(const Vector& theta, int k) const;
  Matrix tamed_gradient(const Vector& theta, int k) const;
  const Matrix& weight(int k) const { return steps_[k - 1].sigma_hat; }
  /// Y(k delta) - Y((k-1) delta).
  const Vector& increment(int k) const { return steps_[k - 1].increment; }

  Vector residual(const Vector& theta, int k) const;
  /// eps^2 Psi(theta) = delta^-1 sum P^T sigma_hat P.
  double weighted_sum(const Vector& theta) const;
  /// Psi(theta); requires epsilon > 0.
  double psi(const Vector& theta) const;
  /// eps^2 (Psi(theta) - Psi(theta0)), evaluated from both contrasts.
  double phi(const Vector& theta, const Vector& theta0) const;
  /// The same quantity through 2 sum Gamma^T sigma_hat P_k(theta0) + delta sum Gamma^T sigma_hat Gamma
  /// with Gamma the tamed drift difference.
  double phi_decomposition(const Vector& theta, const Vector& theta0) const;
  /// grad Phi = -2 sum (grad b_tamed)^T sigma_hat P_k(theta).
  Vector grad_phi(const Vector& theta) const;
  /// eps^-1 grad Phi, the scaling of the chain-rule identity.
  Vector grad_phi_scaled(const Vector& theta) const;
  /// Normal-equation sums of the untamed residuals (scalar, p = 2, linear models).
  NormalSums normal_sums() const;

 private:
  struct Step {
    Segment segment;
    ParticleEnsemble law;
    Vector increment;
    Matrix sigma_hat;
    Vector drift_at_zero;  // linear models only
    Matrix gradient;       // linear models only
  };

  const ModelSpec* model_;
  int n_ = 0;
  double delta_ = 0.0;
  double epsilon_ = 0.0;
  Taming taming_{};
  bool linear_ = false;
  std::vector<Step> steps_;
};

/// P_k(theta).
Vector residual(const ObservationSet& obs, const ModelSpec& model, const Vector& theta, int k);
/// Psi(theta).
double contrast(const ObservationSet& obs, const ModelSpec& model, const Vector& theta);
/// grad Phi(theta).
Vector grad_contrast_phi(const ObservationSet& obs, const ModelSpec& model, const Vector& theta);

struct EstimatorOptions {
  GridOptions grid{};
  NelderMeadOptions nelder_mead{};
};

/// argmin over the closed box by the grid or Nelder-Mead method.
EstimationResult lse_minimize(const Contrast& contrast, const ThetaBox& box, EstimationMethod method,
                              const EstimatorOptions& options = {});
EstimationResult lse_minimize(const ObservationSet& obs, const ModelSpec& model, const ThetaBox& box,
                              EstimationMethod method, const EstimatorOptions& options = {});

/// theta1 = (A2 A5 - A3 A4) / (delta (A1 A5 - A4^2)),
/// theta2 = (A1 A3 - A2 A4) / (delta (A1 A5 - A4^2)).
/// Throws kSingularDesign when |A1 A5 - A4^2| <= 1e-12 A1 A5.
Vector closed_form_from_sums(const NormalSums& sums, double delta);

NormalSums normal_sums(const ObservationSet& obs, const ModelSpec& model);

/// Closed-form LSE of a scalar model linear in a two-dimensional theta,
/// using the untamed drift in the residuals.
EstimationResult closed_form_linear_lse(const ObservationSet& obs, const ModelSpec& model);
EstimationResult closed_form_linear_lse(const Contrast& contrast);

}  // namespace mvlse
