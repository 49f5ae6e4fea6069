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

// Tamed Euler-Maruyama simulation of the path-dependent McKean-Vlasov SDE.
//
// One step of the scheme reads
//
//   Y(k delta) = Y((k-1) delta) + b_tamed(Ybar_{k-1}, L_{k-1}, theta) delta
//                + eps * sigma(Ybar_{k-1}, L_{k-1}) dB_k,
//
// where Ybar_{k-1} is the interpolated segment of the observations at step
// k-1 and L_{k-1} the law supplied by a LawProvider.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <random>
#include <string_view>
#include <vector>

#include "mvlse/model.hpp"

namespace mvlse {

struct SimConfig {
  double epsilon = 0.01;  ///< noise scale; 0 gives the deterministic recursion
  Taming taming{};
  int n_particles = 64;
  std::uint64_t seed = 0;
  GridSpec grid{};

  /// Throws kParameter on epsilon outside [0, 1), bad alpha or N < 1.
  void validate() const;
};

/// Splittable seed tree: every (master seed, id path) pair names an
/// independent, reproducible normal stream regardless of thread schedule.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  RngStream child(std::uint64_t id) const { return RngStream(key_, id); }
  std::mt19937_64 engine() const { return std::mt19937_64(key_); }
  std::uint64_t key() const noexcept { return key_; }

 private:
  RngStream(std::uint64_t parent, std::uint64_t id) : key_(mix(parent + mix(id + 0x9e3779b97f4a7c15ULL))) {}
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
};

/// n independent N(0, delta I_m) vectors; column k-1 drives step k.
Matrix brownian_increments(const RngStream& stream, const GridSpec& grid, int m);

enum class LawMode { kParticleEnsemble, kDiracAtLimitOde };

std::string_view to_string(LawMode mode) noexcept;
LawMode law_mode_from_string(std::string_view text);

/// Source of the law used in the coefficients at each step.
class LawProvider {
 public:
  /// Law at step k is the empirical law of the ensemble's interpolated
  /// segments at step k.
  static LawProvider ensemble(std::shared_ptr<const std::vector<DiscretePath>> paths);
  /// Law at step k is the Dirac mass at the limit path's segment.
  static LawProvider dirac(std::shared_ptr<const DiscretePath> limit_path);

  LawMode mode() const noexcept { return mode_; }
  ParticleEnsemble law_at(int k) const;
  const GridSpec& grid() const;

 private:
  LawMode mode_ = LawMode::kParticleEnsemble;
  std::shared_ptr<const std::vector<DiscretePath>> paths_;
  std::shared_ptr<const DiscretePath> limit_;
};

/// One path of the scheme driven by the given increments (m x n) and laws.
DiscretePath tamed_em_path(const ModelSpec& model, const Segment& xi, const Vector& theta,
                           const SimConfig& cfg, const LawProvider& law, const Matrix& increments);

/// N co-evolving copies started at xi, each step evaluated against the
/// frozen empirical law of all N segments at the previous step. Particle i
/// draws its noise from stream.child(i).
std::vector<DiscretePath> particle_system(const ModelSpec& model, const Segment& xi, const Vector& theta,
                                          const SimConfig& cfg, const RngStream& stream);

/// Same, with explicit per-particle increments (one m x n matrix each).
std::vector<DiscretePath> particle_system(const ModelSpec& model, const Segment& xi, const Vector& theta,
                                          const SimConfig& cfg, const std::vector<Matrix>& increments);

/// Deterministic recursion (eps = 0) with the Dirac law at its own segment.
DiscretePath limit_ode(const ModelSpec& model, const Segment& xi, const Vector& theta0, const GridSpec& grid,
                       const Taming& taming);

/// CSV with header `t,particle_id,x_1..x_d`, one row per node and particle.
void write_paths_csv(std::ostream& os, const std::vector<DiscretePath>& paths);

}  // namespace mvlse
