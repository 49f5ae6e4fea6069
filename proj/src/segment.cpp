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

#include "mvlse/segment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mvlse/error.hpp"

namespace mvlse {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kGridMismatch: return "grid-mismatch";
    case ErrorKind::kIndex: return "index";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kParameter: return "parameter";
    case ErrorKind::kNearSingularDiffusion: return "near-singular-diffusion";
    case ErrorKind::kDivergence: return "divergence";
    case ErrorKind::kUnsupportedCoupling: return "unsupported-coupling";
    case ErrorKind::kSingularDesign: return "singular-design";
    case ErrorKind::kNonIdentifiable: return "non-identifiable";
    case ErrorKind::kEstimationFailed: return "estimation-failed";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

GridSpec make_grid(double T, int n, double r0) {
  if (!(T > 0.0) || !(r0 > 0.0) || n < 1 || !std::isfinite(T) || !std::isfinite(r0)) {
    std::ostringstream os;
    os << "invalid grid inputs T=" << T << " n=" << n << " r0=" << r0;
    throw Error(ErrorKind::kGridMismatch, os.str());
  }
  const double delta = T / static_cast<double>(n);
  const double ratio = r0 / delta;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-12 * std::max(1.0, std::abs(ratio))) {
    std::ostringstream os;
    os << "r0=" << r0 << " is not an integer multiple of delta=T/n=" << delta;
    throw Error(ErrorKind::kGridMismatch, os.str());
  }
  return GridSpec{T, n, r0, static_cast<int>(rounded), delta};
}

double floor_time(double t, double delta) { return std::floor(t / delta) * delta; }

Segment::Segment(int dim, double delta, std::vector<double> values)
    : dim_(dim), delta_(delta), values_(std::move(values)) {
  if (dim_ < 1 || values_.size() < 2 * static_cast<std::size_t>(dim_) ||
      values_.size() % static_cast<std::size_t>(dim_) != 0) {
    throw Error(ErrorKind::kDomain, "segment needs at least two nodes of the given dimension");
  }
  if (!(delta_ > 0.0)) throw Error(ErrorKind::kDomain, "segment step must be positive");
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kDomain, "segment entries must be finite");
  }
}

Segment Segment::constant(int dim, int M, double delta, const Vector& level) {
  std::vector<double> values(static_cast<std::size_t>(M + 1) * dim);
  for (int i = 0; i <= M; ++i) {
    for (int j = 0; j < dim; ++j) values[static_cast<std::size_t>(i) * dim + j] = level(j);
  }
  return Segment(dim, delta, std::move(values));
}

Vector Segment::node_vector(int i) const {
  auto p = node(i);
  return Eigen::Map<const Vector>(p.data(), dim_);
}

DiscretePath::DiscretePath(GridSpec grid, int dim, std::vector<double> values)
    : grid_(grid), dim_(dim), values_(std::move(values)) {
  if (dim_ < 1 || values_.size() != grid_.path_length() * static_cast<std::size_t>(dim_)) {
    throw Error(ErrorKind::kDomain, "path length must be n + M + 1 nodes");
  }
}

Vector DiscretePath::at_vector(int k) const {
  auto p = at(k);
  return Eigen::Map<const Vector>(p.data(), dim_);
}

DiscretePath assemble_path(const GridSpec& grid, const Segment& xi, std::span<const double> forward) {
  const int d = xi.dim();
  if (xi.steps() != grid.M) throw Error(ErrorKind::kDomain, "initial segment is not on the grid");
  if (forward.size() != static_cast<std::size_t>(grid.n) * d) {
    throw Error(ErrorKind::kDomain, "forward values must cover n steps");
  }
  std::vector<double> values;
  values.reserve(grid.path_length() * d);
  values.insert(values.end(), xi.raw().begin(), xi.raw().end());
  values.insert(values.end(), forward.begin(), forward.end());
  return DiscretePath(grid, d, std::move(values));
}

Segment interp_segment(const DiscretePath& path, int k) {
  const GridSpec& g = path.grid();
  if (k < 0 || k > g.n) {
    std::ostringstream os;
    os << "segment index k=" << k << " outside [0, " << g.n << "]";
    throw Error(ErrorKind::kIndex, os.str());
  }
  const auto d = static_cast<std::size_t>(path.dim());
  const auto begin = path.raw().begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(k) * d);
  std::vector<double> values(begin, begin + static_cast<std::ptrdiff_t>((g.M + 1) * d));
  return Segment(path.dim(), g.delta, std::move(values));
}

Vector eval_segment(const Segment& seg, double s) {
  const int M = seg.steps();
  const double r0 = seg.r0();
  if (!(s >= -r0 && s <= 0.0)) {
    std::ostringstream os;
    os << "s=" << s << " outside [" << -r0 << ", 0]";
    throw Error(ErrorKind::kDomain, os.str());
  }
  // s in [-(i+1)delta, -i delta]; node index of -i delta is M - i.
  const double u = -s / seg.delta();
  const double nearest = std::round(u);
  if (std::abs(u - nearest) <= 1e-9 * std::max(1.0, nearest)) {
    return seg.node_vector(M - static_cast<int>(nearest));
  }
  int i = static_cast<int>(std::floor(u));
  if (i >= M) i = M - 1;
  const double w = u - i;  // 0 at -i delta, 1 at -(i+1) delta
  if (w == 0.0) return seg.node_vector(M - i);
  return (1.0 - w) * seg.node_vector(M - i) + w * seg.node_vector(M - i - 1);
}

double sup_norm(const Segment& seg) {
  double best = 0.0;
  for (int i = 0; i <= seg.steps(); ++i) {
    double sq = 0.0;
    for (double v : seg.node(i)) sq += v * v;
    best = std::max(best, std::sqrt(sq));
  }
  return best;
}

Vector integrate(const Segment& seg) {
  const int M = seg.steps();
  const int d = seg.dim();
  const auto v = seg.raw();
  Vector acc = Vector::Zero(d);
  for (int j = 0; j < d; ++j) {
    double s = 0.5 * (v[j] + v[static_cast<std::size_t>(M) * d + j]);
    for (int i = 1; i < M; ++i) s += v[static_cast<std::size_t>(i) * d + j];
    acc(j) = s * seg.delta();
  }
  return acc;
}

double integrate_abs(const Segment& seg) {
  // Exact integral of |.| on each linear piece, including sign changes.
  const int M = seg.steps();
  double acc = 0.0;
  for (int i = 0; i < M; ++i) {
    const double a = seg.scalar(i);
    const double b = seg.scalar(i + 1);
    if ((a >= 0.0 && b >= 0.0) || (a <= 0.0 && b <= 0.0)) {
      acc += 0.5 * (std::abs(a) + std::abs(b));
    } else {
      acc += 0.5 * (a * a + b * b) / (std::abs(a) + std::abs(b));
    }
  }
  return acc * seg.delta();
}

}  // namespace mvlse
