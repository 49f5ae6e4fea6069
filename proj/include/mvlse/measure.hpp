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

#pragma once

#include <functional>
#include <vector>

#include "mvlse/segment.hpp"

namespace mvlse {

/// Equal-weight empirical law of N >= 1 segments. A Dirac mass is N = 1.
class ParticleEnsemble {
 public:
  explicit ParticleEnsemble(std::vector<Segment> particles);
  static ParticleEnsemble dirac(Segment segment);

  std::size_t size() const noexcept { return particles_.size(); }
  const Segment& operator[](std::size_t i) const noexcept { return particles_[i]; }
  const std::vector<Segment>& particles() const noexcept { return particles_; }

  auto begin() const noexcept { return particles_.begin(); }
  auto end() const noexcept { return particles_.end(); }

 private:
  std::vector<Segment> particles_;
};

/// (1/N) sum_i f(zeta_i).
Vector empirical_integral(const ParticleEnsemble& mu, const std::function<Vector(const Segment&)>& f);

struct W2Result {
  double value = 0.0;
  /// False when N exceeds the exact-assignment limit and `value` is the
  /// greedy matching cost, an upper bound on W2.
  bool exact = true;
};

inline constexpr std::size_t kW2ExactLimit = 64;

/// W2 between two equal-size empirical laws with sup-norm ground cost.
W2Result w2_empirical(const ParticleEnsemble& a, const ParticleEnsemble& b);

/// Minimum-cost perfect matching of a square cost matrix (Hungarian method).
/// Returns assignment[row] = column.
std::vector<int> solve_assignment(const Matrix& cost);

}  // namespace mvlse
