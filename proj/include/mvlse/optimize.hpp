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

// Derivative-free minimisers over a closed axis-aligned box.

#pragma once

#include <functional>

#include "mvlse/model.hpp"

namespace mvlse {

using Objective = std::function<double(const Vector&)>;

struct OptimizeResult {
  Vector x;
  double value = 0.0;
  long evaluations = 0;
  bool converged = false;
  bool boundary_hit = false;
};

struct GridOptions {
  int points_per_axis = 101;
  /// Half-width of the refinement window, in coarse cells.
  int refine_cells = 2;
  /// Refinement spacing is the coarse spacing divided by this.
  int refine_factor = 10;
};

struct NelderMeadOptions {
  double diameter_tol = 1e-8;
  long max_evaluations = 10000;
  /// Initial simplex edge as a fraction of each box width.
  double initial_step = 0.1;
};

/// Dense lattice over the box followed by one finer pass around the best
/// lattice point. Non-finite values count as +inf; all non-finite fails with
/// kEstimationFailed.
OptimizeResult minimize_grid(const Objective& f, const ThetaBox& box, const GridOptions& options = {});

/// Simplex descent from the box centre; trial points leaving the box are
/// reflected back across the violated face. Stops when the simplex diameter
/// drops below the tolerance or the evaluation budget runs out.
OptimizeResult minimize_nelder_mead(const Objective& f, const ThetaBox& box, const NelderMeadOptions& options = {});

/// True when any coordinate sits on a face of the box (within 1e-9 of its width).
bool on_boundary(const Vector& x, const ThetaBox& box);

}  // namespace mvlse
