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

#include "mvlse/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "mvlse/error.hpp"

namespace mvlse {

std::string_view version() noexcept { return "mvlse 1.0.0"; }

std::string_view to_string(StudyKind kind) noexcept {
  switch (kind) {
    case StudyKind::kConsistency: return "consistency";
    case StudyKind::kNormality: return "normality";
    case StudyKind::kRate: return "rate";
    case StudyKind::kEstimate: return "estimate";
    case StudyKind::kSimulate: return "simulate";
    case StudyKind::kOde: return "ode";
  }
  return "unknown";
}

ModelSpec model_from_config(const ExperimentConfig& cfg) {
  if (cfg.model == "example") return example_model(cfg.r0);
  throw Error(ErrorKind::kConfig, "model '" + cfg.model + "' must be supplied through the library API");
}

namespace {

// Runs task(i) for i in [0, count) on a small pool. Each task writes only its
// own slot, so results do not depend on the schedule.
template <typename Task>
void parallel_for(int count, int workers, Task&& task) {
  int threads = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, std::max(1, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) task(i);
    });
  }
  for (auto& th : pool) th.join();
}

double median(std::vector<double> xs) {
  if (xs.empty()) return std::nan("");
  std::sort(xs.begin(), xs.end());
  const auto mid = xs.size() / 2;
  return xs.size() % 2 == 1 ? xs[mid] : 0.5 * (xs[mid - 1] + xs[mid]);
}

struct Cell {
  int eps_index = 0;
  int n_index = 0;
  double epsilon = 0.0;
  GridSpec grid{};
  Segment xi;
  std::shared_ptr<const DiscretePath> limit;  // Dirac mode only
};

std::vector<Cell> make_cells(const ExperimentConfig& cfg, const ModelSpec& model) {
  std::vector<Cell> cells;
  for (std::size_t e = 0; e < cfg.epsilons.size(); ++e) {
    for (std::size_t j = 0; j < cfg.n_list.size(); ++j) {
      Cell c;
      c.eps_index = static_cast<int>(e);
      c.n_index = static_cast<int>(j);
      c.epsilon = cfg.epsilons[e];
      c.grid = make_grid(cfg.T, cfg.n_list[j], cfg.r0);
      c.xi = cfg.initial_path.sample(c.grid);
      if (cfg.law_mode == LawMode::kDiracAtLimitOde) {
        c.limit = std::make_shared<const DiscretePath>(limit_ode(model, c.xi, cfg.theta0, c.grid, cfg.taming()));
      }
      cells.push_back(std::move(c));
    }
  }
  return cells;
}

// Simulated observations of replication `rep` in `cell`.
ObservationSet simulate_observations(const ExperimentConfig& cfg, const ModelSpec& model, const Cell& cell,
                                     int rep) {
  const RngStream stream = RngStream(cfg.seed)
                               .child(static_cast<std::uint64_t>(cell.eps_index))
                               .child(static_cast<std::uint64_t>(cell.n_index))
                               .child(static_cast<std::uint64_t>(rep));
  SimConfig sim;
  sim.epsilon = cell.epsilon;
  sim.taming = cfg.taming();
  sim.n_particles = cfg.n_particles;
  sim.seed = cfg.seed;
  sim.grid = cell.grid;

  if (cfg.law_mode == LawMode::kDiracAtLimitOde) {
    const LawProvider law = LawProvider::dirac(cell.limit);
    const Matrix inc = brownian_increments(stream.child(0), cell.grid, model.m);
    return ObservationSet{tamed_em_path(model, cell.xi, cfg.theta0, sim, law, inc), law, cell.epsilon,
                          cfg.taming()};
  }
  auto paths = std::make_shared<const std::vector<DiscretePath>>(
      particle_system(model, cell.xi, cfg.theta0, sim, stream));
  DiscretePath observed = paths->front();
  return ObservationSet{std::move(observed), LawProvider::ensemble(std::move(paths)), cell.epsilon, cfg.taming()};
}

bool admits_closed_form(const ModelSpec& model) { return model.is_linear_in_theta && model.p == 2 && model.d == 1; }

ReplicationRecord run_replication(const ExperimentConfig& cfg, const ModelSpec& model, const Cell& cell, int rep) {
  ReplicationRecord rec;
  rec.epsilon = cell.epsilon;
  rec.n = cell.grid.n;
  rec.rep = rep;
  rec.method = std::string(to_string(cfg.method));
  const auto start = std::chrono::steady_clock::now();
  try {
    const ObservationSet obs = simulate_observations(cfg, model, cell, rep);
    const Contrast contrast(obs, model);
    const EstimationResult est = lse_minimize(contrast, cfg.theta_box, cfg.method, cfg.estimator_options());
    rec.theta_hat = est.theta_hat;
    rec.err_norm = (est.theta_hat - cfg.theta0).norm();
    rec.boundary_hit = est.boundary_hit;
    if (admits_closed_form(model)) {
      try {
        rec.closed_form = closed_form_linear_lse(contrast).theta_hat;
      } catch (const Error&) {
        rec.closed_form.reset();
      }
    }
  } catch (const Error& e) {
    rec.ok = false;
    rec.failure = e.what();
    rec.theta_hat = Vector::Constant(model.p, std::nan(""));
    rec.err_norm = std::nan("");
  }
  rec.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

GridSpec reference_grid(const ExperimentConfig& cfg) {
  const GridSpec base = make_grid(cfg.T, cfg.n, cfg.r0);
  const int factor = std::max(1, static_cast<int>(std::ceil(base.delta / cfg.reference_delta - 1e-9)));
  return make_grid(cfg.T, base.n * factor, cfg.r0);
}

void attach_limit_targets(StudyReport& report, const ModelSpec& model) {
  const ExperimentConfig& cfg = report.config;
  const GridSpec g = reference_grid(cfg);
  const DiscretePath x0 = limit_ode(model, cfg.initial_path.sample(g), cfg.theta0, g, cfg.taming());
  report.info_matrix = info_matrix(model, x0, cfg.theta0);
  try {
    report.target_cov = limit_covariance(model, x0, cfg.theta0);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kNonIdentifiable) throw;
  }
}

StudyReport run_cells(StudyKind kind, const ExperimentConfig& cfg, const ModelSpec& model) {
  cfg.validate();
  if (cfg.theta0.size() != model.p) throw Error(ErrorKind::kConfig, "theta0 dimension differs from the model");
  StudyReport report;
  report.kind = kind;
  report.config = cfg;
  const std::vector<Cell> cells = make_cells(cfg, model);
  const int R = cfg.replications;
  const int total = static_cast<int>(cells.size()) * R;
  report.records.resize(static_cast<std::size_t>(total));
  parallel_for(total, cfg.workers, [&](int i) {
    report.records[static_cast<std::size_t>(i)] = run_replication(cfg, model, cells[i / R], i % R);
  });

  for (std::size_t c = 0; c < cells.size(); ++c) {
    CellSummary s;
    s.epsilon = cells[c].epsilon;
    s.n = cells[c].grid.n;
    std::vector<double> errs, cf_errs;
    for (int r = 0; r < R; ++r) {
      const auto& rec = report.records[c * R + r];
      if (!rec.ok) continue;
      errs.push_back(rec.err_norm);
      if (rec.boundary_hit) ++s.boundary_hits;
      if (rec.closed_form) cf_errs.push_back((*rec.closed_form - cfg.theta0).norm());
    }
    if (errs.empty()) {
      std::ostringstream os;
      os << "every replication failed in cell epsilon=" << s.epsilon << " n=" << s.n << ": "
         << report.records[c * R].failure;
      throw Error(ErrorKind::kEstimationFailed, os.str());
    }
    s.succeeded = static_cast<int>(errs.size());
    s.median_error = median(errs);
    double sum = 0.0;
    for (double e : errs) sum += e;
    s.mean_error = sum / static_cast<double>(errs.size());
    if (!cf_errs.empty()) s.median_closed_form_error = median(cf_errs);
    report.cells.push_back(std::move(s));
  }

  // Monotonicity in epsilon (largest first) for every n.
  std::vector<int> eps_order(cfg.epsilons.size());
  for (std::size_t e = 0; e < eps_order.size(); ++e) eps_order[e] = static_cast<int>(e);
  std::stable_sort(eps_order.begin(), eps_order.end(),
                   [&](int a, int b) { return cfg.epsilons[a] > cfg.epsilons[b]; });
  const auto n_count = cfg.n_list.size();
  for (std::size_t j = 0; j < n_count; ++j) {
    bool monotone = true;
    for (std::size_t e = 1; e < eps_order.size(); ++e) {
      const double prev = report.cells[eps_order[e - 1] * n_count + j].median_error;
      const double cur = report.cells[eps_order[e] * n_count + j].median_error;
      if (!(cur < prev)) monotone = false;
    }
    report.monotone_by_n.push_back(monotone);
    const double first = report.cells[eps_order.front() * n_count + j].median_error;
    const double last = report.cells[eps_order.back() * n_count + j].median_error;
    report.median_ratio_by_n.push_back(last > 0.0 ? first / last : std::numeric_limits<double>::infinity());
  }
  return report;
}

}  // namespace

StudyReport run_consistency_sweep(const ExperimentConfig& cfg, const ModelSpec& model) {
  return run_cells(StudyKind::kConsistency, cfg, model);
}

StudyReport run_normality_study(const ExperimentConfig& cfg, const ModelSpec& model) {
  StudyReport report = run_cells(StudyKind::kNormality, cfg, model);
  attach_limit_targets(report, model);
  const int R = cfg.replications;
  const auto p = model.p;
  for (std::size_t c = 0; c < report.cells.size(); ++c) {
    CellSummary& s = report.cells[c];
    if (!(s.epsilon > 0.0)) {
      s.scaled_defined = false;
      continue;
    }
    std::vector<Vector> scaled;
    for (int r = 0; r < R; ++r) {
      const auto& rec = report.records[c * R + r];
      if (rec.ok) scaled.push_back((rec.theta_hat - cfg.theta0) / s.epsilon);
    }
    if (scaled.size() < 2) continue;
    const auto count = static_cast<double>(scaled.size());
    Vector mean = Vector::Zero(p);
    for (const auto& v : scaled) mean += v;
    mean /= count;
    Matrix cov = Matrix::Zero(p, p);
    Vector m3 = Vector::Zero(p), m4 = Vector::Zero(p);
    for (const auto& v : scaled) {
      const Vector dv = v - mean;
      cov += dv * dv.transpose();
      m3 += dv.array().cube().matrix();
      m4 += dv.array().square().square().matrix();
    }
    cov /= (count - 1.0);
    const Vector var = (cov.diagonal() * (count - 1.0) / count);
    s.scaled_defined = true;
    s.scaled_mean = mean;
    s.scaled_cov = cov;
    s.skewness = (m3.array() / count) / var.array().pow(1.5);
    s.excess_kurtosis = (m4.array() / count) / var.array().square() - 3.0;
    s.mean_within_clt = ((mean.array().abs()) <= 4.0 * (cov.diagonal().array() / count).sqrt()).all();
    if (report.target_cov) {
      s.cov_rel_frobenius = (cov - *report.target_cov).norm() / report.target_cov->norm();
    }
  }
  return report;
}

StudyReport run_rate_study(const ExperimentConfig& cfg, const ModelSpec& model) {
  cfg.validate();
  if (cfg.n_list.size() < 3) throw Error(ErrorKind::kConfig, "the rate study needs at least 3 ladder points in n_list");
  StudyReport report;
  report.kind = StudyKind::kRate;
  report.config = cfg;
  std::vector<int> ladder = cfg.n_list;
  std::sort(ladder.begin(), ladder.end());
  const int n_ref = ladder.back() << cfg.rate_refine;
  for (int nn : ladder) {
    if (n_ref % nn != 0) throw Error(ErrorKind::kConfig, "every n in n_list must divide the reference level");
  }
  const GridSpec ref_grid = make_grid(cfg.T, n_ref, cfg.r0);
  const DiscretePath ref = limit_ode(model, cfg.initial_path.sample(ref_grid), cfg.theta0, ref_grid, cfg.taming());

  std::vector<RatePoint> points(ladder.size());
  parallel_for(static_cast<int>(ladder.size()), cfg.workers, [&](int idx) {
    const GridSpec g = make_grid(cfg.T, ladder[idx], cfg.r0);
    const DiscretePath coarse = limit_ode(model, cfg.initial_path.sample(g), cfg.theta0, g, cfg.taming());
    const int ratio = n_ref / g.n;
    // Sup over [-r0, T] of the difference of the two piecewise-linear paths,
    // attained at reference nodes.
    double err = 0.0;
    for (int k = -ref_grid.M; k <= ref_grid.n; ++k) {
      const int base = k >= 0 ? k / ratio : -((-k + ratio - 1) / ratio);
      const int offset = k - base * ratio;
      const double w = static_cast<double>(offset) / ratio;
      const Vector left = coarse.at_vector(base);
      const Vector value = offset == 0 ? left : Vector((1.0 - w) * left + w * coarse.at_vector(base + 1));
      err = std::max(err, (value - ref.at_vector(k)).norm());
    }
    points[idx] = RatePoint{g.n, g.delta, err};
  });
  report.rate_points = points;

  const bool all_tiny = std::all_of(points.begin(), points.end(), [](const RatePoint& p) { return p.error < 1e-12; });
  if (all_tiny) {
    report.rate_fit_skipped = true;
  } else {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto m = static_cast<double>(points.size());
    for (const auto& p : points) {
      const double x = std::log(p.delta), y = std::log(std::max(p.error, 1e-300));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    report.rate_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  return report;
}

StudyReport run_estimate(const ExperimentConfig& cfg, const ModelSpec& model) {
  cfg.validate();
  StudyReport report;
  report.kind = StudyKind::kEstimate;
  report.config = cfg;
  ExperimentConfig first = cfg;
  first.epsilons = {cfg.epsilons.front()};
  first.n_list = {cfg.n_list.front()};
  const Cell cell = make_cells(first, model).front();
  const ObservationSet obs = simulate_observations(cfg, model, cell, 0);
  const Contrast contrast(obs, model);
  auto add = [&](EstimationResult est, double ms) {
    ReplicationRecord rec;
    rec.epsilon = cell.epsilon;
    rec.n = cell.grid.n;
    rec.rep = 0;
    rec.theta_hat = est.theta_hat;
    rec.err_norm = (est.theta_hat - cfg.theta0).norm();
    rec.method = std::string(to_string(est.method));
    rec.runtime_ms = ms;
    rec.boundary_hit = est.boundary_hit;
    report.records.push_back(rec);
    report.estimates.push_back(std::move(est));
  };
  for (EstimationMethod m : {EstimationMethod::kGrid, EstimationMethod::kNelderMead}) {
    const auto start = std::chrono::steady_clock::now();
    EstimationResult est = lse_minimize(contrast, cfg.theta_box, m, cfg.estimator_options());
    add(std::move(est), std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
  }
  if (admits_closed_form(model)) {
    const auto start = std::chrono::steady_clock::now();
    EstimationResult est = closed_form_linear_lse(contrast);
    add(std::move(est), std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
  }
  return report;
}

StudyReport run_simulate(const ExperimentConfig& cfg, const ModelSpec& model) {
  cfg.validate();
  StudyReport report;
  report.kind = StudyKind::kSimulate;
  report.config = cfg;
  const GridSpec g = make_grid(cfg.T, cfg.n_list.front(), cfg.r0);
  SimConfig sim;
  sim.epsilon = cfg.epsilons.front();
  sim.taming = cfg.taming();
  sim.n_particles = cfg.law_mode == LawMode::kParticleEnsemble ? cfg.n_particles : 1;
  sim.seed = cfg.seed;
  sim.grid = g;
  const Segment xi = cfg.initial_path.sample(g);
  const RngStream stream = RngStream(cfg.seed).child(0).child(0).child(0);
  if (cfg.law_mode == LawMode::kDiracAtLimitOde) {
    auto limit = std::make_shared<const DiscretePath>(limit_ode(model, xi, cfg.theta0, g, cfg.taming()));
    const Matrix inc = brownian_increments(stream.child(0), g, model.m);
    report.paths.push_back(tamed_em_path(model, xi, cfg.theta0, sim, LawProvider::dirac(limit), inc));
  } else {
    report.paths = particle_system(model, xi, cfg.theta0, sim, stream);
  }
  return report;
}

StudyReport run_ode(const ExperimentConfig& cfg, const ModelSpec& model) {
  cfg.validate();
  StudyReport report;
  report.kind = StudyKind::kOde;
  report.config = cfg;
  const GridSpec g = make_grid(cfg.T, cfg.n_list.front(), cfg.r0);
  const DiscretePath x0 = limit_ode(model, cfg.initial_path.sample(g), cfg.theta0, g, cfg.taming());
  report.info_matrix = info_matrix(model, x0, cfg.theta0);
  try {
    report.target_cov = limit_covariance(model, x0, cfg.theta0);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kNonIdentifiable) throw;
  }
  report.paths.push_back(x0);
  return report;
}

StudyReport run_study(StudyKind kind, const ExperimentConfig& cfg, const ModelSpec& model) {
  switch (kind) {
    case StudyKind::kConsistency: return run_consistency_sweep(cfg, model);
    case StudyKind::kNormality: return run_normality_study(cfg, model);
    case StudyKind::kRate: return run_rate_study(cfg, model);
    case StudyKind::kEstimate: return run_estimate(cfg, model);
    case StudyKind::kSimulate: return run_simulate(cfg, model);
    case StudyKind::kOde: return run_ode(cfg, model);
  }
  throw Error(ErrorKind::kConfig, "unknown study kind");
}

}  // namespace mvlse
