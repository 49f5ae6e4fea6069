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

// Shared fixtures and independent oracles for the test suites.

#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "mvlse/estimate.hpp"
#include "mvlse/simulate.hpp"

namespace mvlse::testing {

// Trapezoid rule written out from scratch; used as an oracle for segment
// integrals in the example drift.
inline double trapezoid(const std::vector<double>& v, double delta) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) s += 0.5 * (v[i] + v[i + 1]) * delta;
  return s;
}

inline std::vector<double> values_of(const Segment& seg) { return {seg.raw().begin(), seg.raw().end()}; }

// Example drift from raw node values: th1 + th2 * mean_j b0(zeta, zeta_j).
inline double example_drift_oracle(const std::vector<double>& zeta, const std::vector<std::vector<double>>& law,
                                   double delta, double th1, double th2) {
  const double head = zeta.back();
  const double own = -head * head * head + head + trapezoid(zeta, delta);
  double acc = 0.0;
  for (const auto& other : law) acc += own + trapezoid(other, delta);
  return th1 + th2 * acc / static_cast<double>(law.size());
}

inline Segment ramp(const GridSpec& g, double slope = 1.0) {
  std::vector<double> v(static_cast<std::size_t>(g.M) + 1);
  for (int i = 0; i <= g.M; ++i) v[static_cast<std::size_t>(i)] = slope * g.time_at(i - g.M);
  return Segment(1, g.delta, std::move(v));
}

inline Vector theta0() { return (Vector(2) << 0.5, 0.3).finished(); }
inline ThetaBox unit_box() { return ThetaBox(Vector::Zero(2), Vector::Ones(2)); }

// One observed path of an N-particle system of the example model; the law is
// the whole ensemble.
inline ObservationSet example_observations(double eps, int n, std::uint64_t seed, int particles = 8,
                                           Taming taming = {}, double r0 = 0.1, double T = 1.0) {
  const GridSpec g = make_grid(T, n, r0);
  const ModelSpec model = example_model(r0);
  SimConfig cfg;
  cfg.epsilon = eps;
  cfg.taming = taming;
  cfg.n_particles = particles;
  cfg.seed = seed;
  cfg.grid = g;
  auto paths = std::make_shared<const std::vector<DiscretePath>>(
      particle_system(model, ramp(g), theta0(), cfg, RngStream(seed)));
  DiscretePath observed = paths->front();
  return ObservationSet{std::move(observed), LawProvider::ensemble(paths), eps, taming};
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace mvlse::testing
