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

#include "mvlse/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mvlse/error.hpp"

namespace mvlse {

ParticleEnsemble::ParticleEnsemble(std::vector<Segment> particles) : particles_(std::move(particles)) {
  if (particles_.empty()) throw Error(ErrorKind::kDomain, "an ensemble needs at least one particle");
  const auto len = particles_.front().raw().size();
  for (const auto& p : particles_) {
    if (p.raw().size() != len || p.dim() != particles_.front().dim()) {
      throw Error(ErrorKind::kDomain, "ensemble segments must share one grid");
    }
  }
}

ParticleEnsemble ParticleEnsemble::dirac(Segment segment) {
  std::vector<Segment> one;
  one.push_back(std::move(segment));
  return ParticleEnsemble(std::move(one));
}

Vector empirical_integral(const ParticleEnsemble& mu, const std::function<Vector(const Segment&)>& f) {
  Vector acc = f(mu[0]);
  for (std::size_t i = 1; i < mu.size(); ++i) acc += f(mu[i]);
  return acc / static_cast<double>(mu.size());
}

namespace {

double sup_distance(const Segment& a, const Segment& b) {
  const int d = a.dim();
  double best = 0.0;
  for (int i = 0; i <= a.steps(); ++i) {
    auto x = a.node(i);
    auto y = b.node(i);
    double sq = 0.0;
    for (int j = 0; j < d; ++j) sq += (x[j] - y[j]) * (x[j] - y[j]);
    best = std::max(best, sq);
  }
  return best;  // squared
}

}  // namespace

std::vector<int> solve_assignment(const Matrix& cost) {
  // Shortest augmenting path with row/column potentials, O(N^3).
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] != 0) assignment[p[j] - 1] = j - 1;
  }
  return assignment;
}

W2Result w2_empirical(const ParticleEnsemble& a, const ParticleEnsemble& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kUnsupportedCoupling, "w2_empirical needs equal particle counts");
  }
  const auto n = a.size();
  Matrix cost(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cost(i, j) = sup_distance(a[i], b[j]);
  }
  if (n <= kW2ExactLimit) {
    const auto match = solve_assignment(cost);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += cost(i, match[i]);
    return {std::sqrt(total / static_cast<double>(n)), true};
  }
  // Sorted-cost greedy matching.
  std::vector<std::size_t> order(n * n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return cost(x / n, x % n) < cost(y / n, y % n) || (cost(x / n, x % n) == cost(y / n, y % n) && x < y);
  });
  std::vector<char> row_used(n, 0), col_used(n, 0);
  double total = 0.0;
  std::size_t matched = 0;
  for (std::size_t idx : order) {
    const std::size_t i = idx / n, j = idx % n;
    if (row_used[i] || col_used[j]) continue;
    row_used[i] = col_used[j] = 1;
    total += cost(i, j);
    if (++matched == n) break;
  }
  return {std::sqrt(total / static_cast<double>(n)), false};
}

}  // namespace mvlse
