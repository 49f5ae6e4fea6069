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

#include "mvlse/simulate.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "mvlse/error.hpp"

namespace mvlse {

void SimConfig::validate() const {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    std::ostringstream os;
    os << "epsilon=" << epsilon << " must lie in [0, 1)";
    throw Error(ErrorKind::kParameter, os.str());
  }
  if (taming.enabled) check_alpha(taming.alpha);
  if (n_particles < 1) throw Error(ErrorKind::kParameter, "n_particles must be at least 1");
  if (grid.n < 1 || grid.M < 1 || !(grid.delta > 0.0)) throw Error(ErrorKind::kParameter, "grid is not initialised");
}

Matrix brownian_increments(const RngStream& stream, const GridSpec& grid, int m) {
  auto engine = stream.engine();
  std::normal_distribution<double> normal(0.0, std::sqrt(grid.delta));
  Matrix out(m, grid.n);
  for (int k = 0; k < grid.n; ++k) {
    for (int j = 0; j < m; ++j) out(j, k) = normal(engine);
  }
  return out;
}

std::string_view to_string(LawMode mode) noexcept {
  return mode == LawMode::kParticleEnsemble ? "particle-ensemble" : "dirac-at-limit-ode";
}

LawMode law_mode_from_string(std::string_view text) {
  if (text == "particle-ensemble") return LawMode::kParticleEnsemble;
  if (text == "dirac-at-limit-ode") return LawMode::kDiracAtLimitOde;
  throw Error(ErrorKind::kConfig, "unknown law mode '" + std::string(text) + "'");
}

LawProvider LawProvider::ensemble(std::shared_ptr<const std::vector<DiscretePath>> paths) {
  if (!paths || paths->empty()) throw Error(ErrorKind::kDomain, "ensemble law needs at least one path");
  LawProvider lp;
  lp.mode_ = LawMode::kParticleEnsemble;
  lp.paths_ = std::move(paths);
  return lp;
}

LawProvider LawProvider::dirac(std::shared_ptr<const DiscretePath> limit_path) {
  if (!limit_path) throw Error(ErrorKind::kDomain, "dirac law needs a limit path");
  LawProvider lp;
  lp.mode_ = LawMode::kDiracAtLimitOde;
  lp.limit_ = std::move(limit_path);
  return lp;
}

const GridSpec& LawProvider::grid() const {
  return mode_ == LawMode::kParticleEnsemble ? paths_->front().grid() : limit_->grid();
}

ParticleEnsemble LawProvider::law_at(int k) const {
  if (mode_ == LawMode::kDiracAtLimitOde) return ParticleEnsemble::dirac(interp_segment(*limit_, k));
  std::vector<Segment> segs;
  segs.reserve(paths_->size());
  for (const auto& path : *paths_) segs.push_back(interp_segment(path, k));
  return ParticleEnsemble(std::move(segs));
}

namespace {

void check_xi(const ModelSpec& model, const Segment& xi, const GridSpec& grid) {
  if (xi.dim() != model.d || xi.steps() != grid.M) {
    throw Error(ErrorKind::kDomain, "initial segment does not match the model dimension or grid");
  }
}

void check_increments(const Matrix& inc, const ModelSpec& model, const GridSpec& grid) {
  if (inc.rows() != model.m || inc.cols() != grid.n) {
    throw Error(ErrorKind::kDomain, "increments must be an m x n matrix");
  }
}

// Segment of the growing buffer whose node 0 is the path node at step k - M.
Segment window(const std::vector<double>& buffer, int k, int M, int d, double delta) {
  const auto begin = buffer.begin() + static_cast<std::ptrdiff_t>(k) * d;
  return Segment(d, delta, std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(M + 1) * d));
}

// Y_k = Y_{k-1} + b_tamed delta + eps sigma dB_k, appended to the buffer.
void advance(const ModelSpec& model, const Segment& seg, const ParticleEnsemble& law, const Vector& theta,
             const SimConfig& cfg, const Matrix& increments, int k, std::vector<double>& buffer) {
  const double delta = cfg.grid.delta;
  Vector next = seg.head() + tame_drift(model.drift(seg, law, theta), delta, cfg.taming) * delta;
  if (cfg.epsilon != 0.0) next += cfg.epsilon * (model.sigma(seg, law) * increments.col(k - 1));
  for (Eigen::Index j = 0; j < next.size(); ++j) {
    if (!std::isfinite(next(j))) {
      std::ostringstream os;
      os << "non-finite state at step " << k;
      throw Error(ErrorKind::kDivergence, os.str());
    }
    buffer.push_back(next(j));
  }
}

}  // namespace

DiscretePath tamed_em_path(const ModelSpec& model, const Segment& xi, const Vector& theta, const SimConfig& cfg,
                           const LawProvider& law, const Matrix& increments) {
  cfg.validate();
  const GridSpec& g = cfg.grid;
  check_xi(model, xi, g);
  check_increments(increments, model, g);
  if (law.grid() != g) throw Error(ErrorKind::kDomain, "law provider lives on a different grid");
  std::vector<double> buffer(xi.raw().begin(), xi.raw().end());
  buffer.reserve(g.path_length() * model.d);
  for (int k = 1; k <= g.n; ++k) {
    const Segment seg = window(buffer, k - 1, g.M, model.d, g.delta);
    advance(model, seg, law.law_at(k - 1), theta, cfg, increments, k, buffer);
  }
  return DiscretePath(g, model.d, std::move(buffer));
}

std::vector<DiscretePath> particle_system(const ModelSpec& model, const Segment& xi, const Vector& theta,
                                          const SimConfig& cfg, const std::vector<Matrix>& increments) {
  cfg.validate();
  const GridSpec& g = cfg.grid;
  check_xi(model, xi, g);
  const auto N = increments.size();
  if (N < 1) throw Error(ErrorKind::kDomain, "particle system needs at least one particle");
  for (const auto& inc : increments) check_increments(inc, model, g);

  std::vector<std::vector<double>> buffers(N, std::vector<double>(xi.raw().begin(), xi.raw().end()));
  for (auto& b : buffers) b.reserve(g.path_length() * model.d);
  for (int k = 1; k <= g.n; ++k) {
    std::vector<Segment> segs;
    segs.reserve(N);
    for (const auto& b : buffers) segs.push_back(window(b, k - 1, g.M, model.d, g.delta));
    const ParticleEnsemble law(std::move(segs));
    for (std::size_t i = 0; i < N; ++i) advance(model, law[i], law, theta, cfg, increments[i], k, buffers[i]);
  }
  std::vector<DiscretePath> out;
  out.reserve(N);
  for (auto& b : buffers) out.emplace_back(g, model.d, std::move(b));
  return out;
}

std::vector<DiscretePath> particle_system(const ModelSpec& model, const Segment& xi, const Vector& theta,
                                          const SimConfig& cfg, const RngStream& stream) {
  cfg.validate();
  std::vector<Matrix> increments;
  increments.reserve(static_cast<std::size_t>(cfg.n_particles));
  for (int i = 0; i < cfg.n_particles; ++i) {
    increments.push_back(brownian_increments(stream.child(static_cast<std::uint64_t>(i)), cfg.grid, model.m));
  }
  return particle_system(model, xi, theta, cfg, increments);
}

DiscretePath limit_ode(const ModelSpec& model, const Segment& xi, const Vector& theta0, const GridSpec& grid,
                       const Taming& taming) {
  SimConfig cfg;
  cfg.epsilon = 0.0;
  cfg.taming = taming;
  cfg.n_particles = 1;
  cfg.grid = grid;
  std::vector<Matrix> zero{Matrix::Zero(model.m, grid.n)};
  return std::move(particle_system(model, xi, theta0, cfg, zero).front());
}

void write_paths_csv(std::ostream& os, const std::vector<DiscretePath>& paths) {
  if (paths.empty()) return;
  const int d = paths.front().dim();
  os << "t,particle_id";
  for (int j = 1; j <= d; ++j) os << ",x_" << j;
  os << '\n';
  const auto old_precision = os.precision(17);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& g = paths[i].grid();
    for (int k = -g.M; k <= g.n; ++k) {
      os << g.time_at(k) << ',' << i;
      for (double v : paths[i].at(k)) os << ',' << v;
      os << '\n';
    }
  }
  os.precision(old_precision);
}

}  // namespace mvlse
