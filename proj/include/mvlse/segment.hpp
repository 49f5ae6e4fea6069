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

// Grid arithmetic and piecewise-linear segment paths on [-r0, 0].
//
// A segment is stored at the M+1 grid nodes -r0, -r0+delta, ..., 0. Values
// between nodes are the linear interpolation of the neighbouring nodes, so
// node storage is lossless for everything the estimator evaluates.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mvlse {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Coupled time discretisation: delta = T/n = r0/M.
struct GridSpec {
  double T = 0.0;
  int n = 0;
  double r0 = 0.0;
  int M = 0;
  double delta = 0.0;

  /// Time of observation index k (k = -M .. n), computed from integers.
  double time_at(int k) const noexcept { return static_cast<double>(k) * delta; }
  /// Number of stored path nodes, n + M + 1.
  std::size_t path_length() const noexcept { return static_cast<std::size_t>(n + M + 1); }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Fails with kGridMismatch unless r0 / (T/n) is an integer to 1e-12 relative.
GridSpec make_grid(double T, int n, double r0);

/// floor(t/delta) * delta.
double floor_time(double t, double delta);

class Segment {
 public:
  Segment() = default;
  /// `values` holds (M+1)*dim doubles, node-major. Rejects non-finite entries.
  Segment(int dim, double delta, std::vector<double> values);

  static Segment constant(int dim, int M, double delta, const Vector& level);

  int dim() const noexcept { return dim_; }
  /// Number of delay steps; the segment has M+1 nodes.
  int steps() const noexcept { return static_cast<int>(values_.size()) / (dim_ > 0 ? dim_ : 1) - 1; }
  double delta() const noexcept { return delta_; }
  double r0() const noexcept { return delta_ * steps(); }

  /// Node i sits at time -r0 + i*delta; node M is time 0.
  std::span<const double> node(int i) const noexcept {
    return {values_.data() + static_cast<std::size_t>(i) * dim_, static_cast<std::size_t>(dim_)};
  }
  Vector node_vector(int i) const;
  /// Value at time 0.
  Vector head() const { return node_vector(steps()); }
  double scalar(int i) const noexcept { return values_[static_cast<std::size_t>(i) * dim_]; }

  std::span<const double> raw() const noexcept { return values_; }

 private:
  int dim_ = 0;
  double delta_ = 0.0;
  std::vector<double> values_;
};

class DiscretePath {
 public:
  DiscretePath() = default;
  /// `values` holds (n+M+1)*dim doubles for times -r0 .. T.
  DiscretePath(GridSpec grid, int dim, std::vector<double> values);

  const GridSpec& grid() const noexcept { return grid_; }
  int dim() const noexcept { return dim_; }

  /// Value at time k*delta, k in [-M, n].
  std::span<const double> at(int k) const noexcept {
    return {values_.data() + static_cast<std::size_t>(k + grid_.M) * dim_,
            static_cast<std::size_t>(dim_)};
  }
  Vector at_vector(int k) const;
  std::span<const double> raw() const noexcept { return values_; }

 private:
  GridSpec grid_{};
  int dim_ = 0;
  std::vector<double> values_;
};

/// Builds a DiscretePath from the initial segment and the values at
/// delta, 2 delta, ..., T (node-major, n*dim doubles).
DiscretePath assemble_path(const GridSpec& grid, const Segment& xi, std::span<const double> forward);

/// The interpolated segment of the observations at step k (0 <= k <= n):
/// the linear interpolation of the points at (k-M)delta .. k delta.
Segment interp_segment(const DiscretePath& path, int k);

/// Piecewise-linear evaluation at s in [-r0, 0]; exact at the nodes.
Vector eval_segment(const Segment& seg, double s);

/// max over nodes of the Euclidean norm; exact for piecewise-linear paths.
double sup_norm(const Segment& seg);

/// Trapezoid rule for the integral over [-r0, 0]; exact on piecewise-linear segments.
Vector integrate(const Segment& seg);
/// Trapezoid rule for the integral of |seg| over [-r0, 0] in d = 1.
double integrate_abs(const Segment& seg);

}  // namespace mvlse
