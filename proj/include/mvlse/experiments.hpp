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

// Configuration-driven Monte Carlo studies of the least-squares estimator.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mvlse/asymptotics.hpp"
#include "mvlse/estimate.hpp"
#include "mvlse/simulate.hpp"

namespace mvlse {

std::string_view version() noexcept;

struct InitialPath {
  enum class Kind { kLinearRamp, kConstant };
  Kind kind = Kind::kLinearRamp;
  /// Slope of the ramp, or the constant level.
  double value = 1.0;

  /// Ramp: xi(t) = value * t on [-r0, 0], so xi(0) = 0. Constant: xi = value.
  Segment sample(const GridSpec& grid) const;
  std::string to_string() const;
};

struct ExperimentConfig {
  std::string model = "example";
  double r0 = 0.1;
  double T = 1.0;
  int n = 400;
  std::vector<int> n_list{400};
  Vector theta0;
  ThetaBox theta_box;
  std::vector<double> epsilons{0.01};
  int replications = 200;
  int n_particles = 64;
  double alpha = 0.5;
  bool tamed = true;
  LawMode law_mode = LawMode::kParticleEnsemble;
  std::uint64_t seed = 0;
  InitialPath initial_path{};
  EstimationMethod method = EstimationMethod::kNelderMead;
  int grid_points = 101;
  double nm_tolerance = 1e-8;
  long nm_max_evaluations = 10000;
  /// Reference level of the rate study: finest n times 2^rate_refine.
  int rate_refine = 4;
  /// Largest step of the quadrature behind the limit covariance target.
  double reference_delta = 1e-4;
  /// Worker threads; 0 picks the hardware concurrency. Never affects results.
  int workers = 0;

  Taming taming() const { return {alpha, tamed}; }
  EstimatorOptions estimator_options() const;

  /// Throws kConfig on violated invariants. Noise scales must lie in [0, 1)
  /// here; the file parser is stricter and requires (0, 1).
  void validate() const;
};

/// Parses `key = value` lines with `#` comments and comma-separated lists.
/// Missing optional keys keep their defaults; unknown keys, bad values and
/// grid mismatches raise kConfig naming the key and line.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text form; parse_config(render_config(c)) reproduces c.
std::string render_config(const ExperimentConfig& cfg);

struct ReplicationRecord {
  double epsilon = 0.0;
  int n = 0;
  int rep = 0;
  Vector theta_hat;
  double err_norm = 0.0;
  std::string method;
  double runtime_ms = 0.0;
  bool ok = true;
  std::string failure;
  /// Closed-form estimate on the same data, when the model admits it.
  std::optional<Vector> closed_form;
  bool boundary_hit = false;
};

struct CellSummary {
  double epsilon = 0.0;
  int n = 0;
  int succeeded = 0;
  double median_error = 0.0;
  double mean_error = 0.0;
  std::optional<double> median_closed_form_error;
  int boundary_hits = 0;

  // Normality study: S = eps^-1 (theta_hat - theta0).
  bool scaled_defined = false;
  Vector scaled_mean;
  Matrix scaled_cov;
  Vector skewness;
  Vector excess_kurtosis;
  double cov_rel_frobenius = 0.0;
  bool mean_within_clt = false;
};

struct RatePoint {
  int n = 0;
  double delta = 0.0;
  double error = 0.0;
};

enum class StudyKind { kConsistency, kNormality, kRate, kEstimate, kSimulate, kOde };

std::string_view to_string(StudyKind kind) noexcept;

struct StudyReport {
  StudyKind kind = StudyKind::kConsistency;
  ExperimentConfig config;
  std::vector<ReplicationRecord> records;
  std::vector<CellSummary> cells;

  // Consistency: per n, whether the median error strictly decreases with
  // epsilon, and the ratio of medians at the largest and smallest epsilon.
  std::vector<bool> monotone_by_n;
  std::vector<double> median_ratio_by_n;

  // Limit quantities at theta0 along the reference-resolution limit path.
  std::optional<Matrix> info_matrix;
  std::optional<Matrix> target_cov;

  // Rate study.
  std::vector<RatePoint> rate_points;
  std::optional<double> rate_slope;
  bool rate_fit_skipped = false;

  // Single-dataset outputs of the estimate, simulate and ode commands.
  std::vector<EstimationResult> estimates;
  std::vector<DiscretePath> paths;
};

/// Consistency sweep over every (epsilon, n) cell.
StudyReport run_consistency_sweep(const ExperimentConfig& cfg, const ModelSpec& model);
/// Consistency sweep plus the scaled-error statistics against the limit covariance.
StudyReport run_normality_study(const ExperimentConfig& cfg, const ModelSpec& model);
/// Noise-free self-convergence of the scheme over the n_list ladder.
StudyReport run_rate_study(const ExperimentConfig& cfg, const ModelSpec& model);
/// One dataset from the first cell, estimated by every applicable method.
StudyReport run_estimate(const ExperimentConfig& cfg, const ModelSpec& model);
/// One particle system from the first cell.
StudyReport run_simulate(const ExperimentConfig& cfg, const ModelSpec& model);
/// The limit path and its limit quantities on the first grid.
StudyReport run_ode(const ExperimentConfig& cfg, const ModelSpec& model);

StudyReport run_study(StudyKind kind, const ExperimentConfig& cfg, const ModelSpec& model);

/// Model named by the config; custom-hook models must be supplied by the caller.
ModelSpec model_from_config(const ExperimentConfig& cfg);

/// records.csv: epsilon,n,rep,theta_hat_1..p,err_norm,method,runtime_ms. The
/// runtime column is left empty unless `with_timing`, keeping reruns
/// byte-identical.
void write_records_csv(std::ostream& os, const StudyReport& report, bool with_timing);
/// summary.json: resolved config, version, law mode, aggregates, targets.
std::string summary_json(const StudyReport& report, bool with_timing);
/// rate.csv: n,delta,error.
void write_rate_csv(std::ostream& os, const StudyReport& report);

/// Writes every artefact of the report into `dir` (created if missing).
void write_report(const StudyReport& report, const std::string& dir, bool with_timing);

/// {theta_hat, contrast_value, method, evaluations, converged, boundary_hit}.
std::string estimation_result_json(const EstimationResult& result);
/// {"dims": [rows, cols], "data": [[...], ...]} in row-major order.
std::string matrix_json(const Matrix& m);

}  // namespace mvlse
