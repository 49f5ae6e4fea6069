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

#include "mvlse/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "mvlse/error.hpp"

namespace mvlse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Counted {
 public:
  explicit Counted(const Objective& f) : f_(f) {}

  double operator()(const Vector& x) {
    ++evaluations_;
    const double v = f_(x);
    if (!std::isfinite(v)) return kInf;
    any_finite_ = true;
    return v;
  }
  long evaluations() const noexcept { return evaluations_; }
  bool any_finite() const noexcept { return any_finite_; }

 private:
  const Objective& f_;
  long evaluations_ = 0;
  bool any_finite_ = false;
};

// Visits every point of a lattice with `counts[i]` points on [lo_i, hi_i].
template <typename Visit>
void for_each_lattice_point(const Vector& lo, const Vector& hi, const std::vector<int>& counts, Visit&& visit) {
  const auto p = static_cast<int>(lo.size());
  std::vector<int> idx(p, 0);
  Vector x(p);
  while (true) {
    for (int i = 0; i < p; ++i) {
      x(i) = counts[i] == 1 ? lo(i) : lo(i) + (hi(i) - lo(i)) * idx[i] / static_cast<double>(counts[i] - 1);
    }
    visit(x);
    int axis = 0;
    while (axis < p && ++idx[axis] == counts[axis]) idx[axis++] = 0;
    if (axis == p) break;
  }
}

Vector reflect_into(Vector x, const ThetaBox& box) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double lo = box.lower(i), hi = box.upper(i);
    if (x(i) < lo) x(i) = lo + (lo - x(i));
    if (x(i) > hi) x(i) = hi - (x(i) - hi);
  }
  return box.clamp(x);
}

}  // namespace

bool on_boundary(const Vector& x, const ThetaBox& box) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double width = box.upper(i) - box.lower(i);
    if (width == 0.0) continue;
    const double tol = 1e-9 * width;
    if (x(i) - box.lower(i) <= tol || box.upper(i) - x(i) <= tol) return true;
  }
  return false;
}

OptimizeResult minimize_grid(const Objective& f, const ThetaBox& box, const GridOptions& options) {
  const int p = box.dim();
  Counted eval(f);
  std::vector<int> counts(p);
  for (int i = 0; i < p; ++i) counts[i] = box.upper(i) > box.lower(i) ? std::max(2, options.points_per_axis) : 1;

  Vector best_x = box.center();
  double best = kInf;
  auto visit = [&](const Vector& x) {
    const double v = eval(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  };
  for_each_lattice_point(box.lower, box.upper, counts, visit);
  if (!eval.any_finite()) throw Error(ErrorKind::kEstimationFailed, "objective is non-finite at every lattice point");

  // Refinement lattice around the coarse winner, clipped to the box.
  Vector lo(p), hi(p);
  std::vector<int> fine(p);
  for (int i = 0; i < p; ++i) {
    if (counts[i] == 1) {
      lo(i) = hi(i) = box.lower(i);
      fine[i] = 1;
      continue;
    }
    const double h = (box.upper(i) - box.lower(i)) / (counts[i] - 1);
    const double hf = h / options.refine_factor;
    const int half = options.refine_cells * options.refine_factor;
    const int below = std::min(half, static_cast<int>(std::floor((best_x(i) - box.lower(i)) / hf + 1e-9)));
    const int above = std::min(half, static_cast<int>(std::floor((box.upper(i) - best_x(i)) / hf + 1e-9)));
    lo(i) = best_x(i) - below * hf;
    hi(i) = best_x(i) + above * hf;
    fine[i] = below + above + 1;
  }
  for_each_lattice_point(lo, hi, fine, [&](const Vector& x) { visit(box.clamp(x)); });

  OptimizeResult result;
  result.x = best_x;
  result.value = best;
  result.evaluations = eval.evaluations();
  result.converged = true;
  result.boundary_hit = on_boundary(best_x, box);
  return result;
}

OptimizeResult minimize_nelder_mead(const Objective& f, const ThetaBox& box, const NelderMeadOptions& options) {
  const int p = box.dim();
  Counted eval(f);
  std::vector<int> free_axes;
  for (int i = 0; i < p; ++i) {
    if (box.upper(i) > box.lower(i)) free_axes.push_back(i);
  }
  const auto q = static_cast<int>(free_axes.size());

  OptimizeResult result;
  result.x = box.center();
  result.value = eval(result.x);
  if (q == 0) {
    if (!eval.any_finite()) throw Error(ErrorKind::kEstimationFailed, "objective is non-finite at the only point");
    result.evaluations = eval.evaluations();
    result.converged = true;
    return result;
  }

  std::vector<Vector> simplex(q + 1);
  std::vector<double> values(q + 1);
  std::vector<int> order(q + 1);

  auto build_simplex = [&](const Vector& start, double start_value, double step_fraction) {
    simplex[0] = start;
    values[0] = start_value;
    for (int j = 0; j < q; ++j) {
      const int axis = free_axes[j];
      Vector v = start;
      const double step = step_fraction * (box.upper(axis) - box.lower(axis));
      v(axis) += (v(axis) + step <= box.upper(axis)) ? step : -step;
      simplex[j + 1] = box.clamp(v);
      values[j + 1] = eval(simplex[j + 1]);
    }
  };

  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    std::vector<Vector> s(q + 1);
    std::vector<double> v(q + 1);
    for (int i = 0; i <= q; ++i) {
      s[i] = simplex[order[i]];
      v[i] = values[order[i]];
    }
    simplex = std::move(s);
    values = std::move(v);
  };

  auto diameter = [&] {
    double dmax = 0.0;
    for (int i = 1; i <= q; ++i) dmax = std::max(dmax, (simplex[i] - simplex[0]).norm());
    return dmax;
  };

  // Runs descent from the current simplex; returns true on diameter convergence.
  auto descend = [&] {
    while (true) {
      sort_simplex();
      if (diameter() < options.diameter_tol) return true;
      if (eval.evaluations() >= options.max_evaluations) return false;
      Vector centroid = Vector::Zero(p);
      for (int i = 0; i < q; ++i) centroid += simplex[i];
      centroid /= q;
      const Vector& worst = simplex[q];

      const Vector xr = reflect_into(centroid + (centroid - worst), box);
      const double fr = eval(xr);
      if (fr < values[0]) {
        const Vector xe = reflect_into(centroid + 2.0 * (centroid - worst), box);
        const double fe = eval(xe);
        if (fe < fr) {
          simplex[q] = xe;
          values[q] = fe;
        } else {
          simplex[q] = xr;
          values[q] = fr;
        }
        continue;
      }
      if (fr < values[q - 1]) {
        simplex[q] = xr;
        values[q] = fr;
        continue;
      }
      const bool outside = fr < values[q];
      const Vector xc = outside ? Vector(centroid + 0.5 * (xr - centroid)) : Vector(centroid + 0.5 * (worst - centroid));
      const double fc = eval(xc);
      if (fc < (outside ? fr : values[q])) {
        simplex[q] = xc;
        values[q] = fc;
        continue;
      }
      for (int i = 1; i <= q; ++i) {
        simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
        values[i] = eval(simplex[i]);
      }
    }
  };

  build_simplex(result.x, result.value, options.initial_step);
  bool converged = descend();
  // Restart from the best vertex to guard against a collapsed simplex.
  for (int restart = 0; converged && restart < 3; ++restart) {
    const Vector best = simplex[0];
    const double best_value = values[0];
    build_simplex(best, best_value, std::max(1e3 * options.diameter_tol, 1e-3));
    converged = descend();
    if (!(values[0] < best_value)) break;
  }
  if (!eval.any_finite()) throw Error(ErrorKind::kEstimationFailed, "objective is non-finite at every probe");

  result.x = simplex[0];
  result.value = values[0];
  result.evaluations = eval.evaluations();
  result.converged = converged;
  result.boundary_hit = on_boundary(result.x, box);
  return result;
}

}  // namespace mvlse
