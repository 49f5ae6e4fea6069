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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mvlse/error.hpp"
#include "mvlse/experiments.hpp"
#include "support.hpp"

namespace mvlse {
namespace {

constexpr const char* kMinimal =
    "r0 = 0.1\n"
    "T = 1\n"
    "n = 100\n"
    "theta0 = 0.5, 0.3\n"
    "theta_box = 0, 1, 0, 1\n";

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

ExperimentConfig small_config() {
  ExperimentConfig cfg = parse_config(kMinimal);
  cfg.n = 50;
  cfg.n_list = {50};
  cfg.epsilons = {0.1, 0.02};
  cfg.replications = 3;
  cfg.n_particles = 4;
  cfg.seed = 11;
  cfg.workers = 1;
  return cfg;
}

std::string records_text(const StudyReport& r) {
  std::ostringstream os;
  write_records_csv(os, r, false);
  return os.str();
}

TEST_CASE("minimal config picks up the defaults") {
  const ExperimentConfig cfg = parse_config(kMinimal);
  CHECK(cfg.alpha == 0.5);
  CHECK(cfg.n_particles == 64);
  CHECK(cfg.replications == 200);
  CHECK(cfg.law_mode == LawMode::kParticleEnsemble);
  CHECK(cfg.initial_path.kind == InitialPath::Kind::kLinearRamp);
  CHECK(cfg.initial_path.value == 1.0);
  CHECK(cfg.n_list == std::vector<int>{100});
  CHECK(cfg.theta0.size() == 2);
  CHECK(cfg.method == EstimationMethod::kNelderMead);
  CHECK(cfg.grid_points == 101);
  CHECK(cfg.nm_tolerance == 1e-8);
}

TEST_CASE("config errors name the key and line") {
  CHECK(config_error(std::string(kMinimal) + "theta0 = 2, 0.3\n").find("theta0") != std::string::npos);
  const std::string outside = config_error(
      "r0 = 0.1\nT = 1\nn = 100\ntheta0 = 1.5, 0.3\ntheta_box = 0, 1, 0, 1\n");
  CHECK(outside.find("theta0") != std::string::npos);
  CHECK(outside.find("line 4") != std::string::npos);
  const std::string alpha = config_error(std::string(kMinimal) + "alpha = 0.7\n");
  CHECK(alpha.find("(0, 1/2]") != std::string::npos);
  CHECK(alpha.find("line 6") != std::string::npos);
  const std::string unknown = config_error(std::string(kMinimal) + "colour = blue\n");
  CHECK(unknown.find("colour") != std::string::npos);
  CHECK(unknown.find("line 6") != std::string::npos);
  const std::string grid = config_error("r0 = 0.007\nT = 1\nn = 100\ntheta0 = 0.5, 0.3\ntheta_box = 0, 1, 0, 1\n");
  CHECK(grid.find("'n'") != std::string::npos);
  CHECK(config_error(std::string(kMinimal) + "epsilons = 0.1, 1.2\n").find("epsilons") != std::string::npos);
  CHECK(config_error(std::string(kMinimal) + "n = 200\n").find("duplicate") != std::string::npos);
  CHECK(config_error("T = 1\nn = 100\ntheta0 = 0.5, 0.3\ntheta_box = 0, 1, 0, 1\n").find("r0") != std::string::npos);
  CHECK(config_error(std::string(kMinimal) + "replications = many\n").find("replications") != std::string::npos);
  CHECK(config_error(std::string(kMinimal) + "just words\n").find("line 6") != std::string::npos);
}

TEST_CASE("config comments, lists and round trip") {
  const std::string text = std::string("# header comment\n") + kMinimal +
                           "epsilons = 0.1, 0.05 , 0.01  # trailing\n"
                           "n_list = 100, 200\n"
                           "law_mode = dirac-at-limit-ode\n"
                           "initial_path = constant(0.5)\n"
                           "tamed = false\n"
                           "seed = 18446744073709551615\n";
  const ExperimentConfig cfg = parse_config(text);
  CHECK(cfg.epsilons == std::vector<double>{0.1, 0.05, 0.01});
  CHECK(cfg.n_list == std::vector<int>{100, 200});
  CHECK(cfg.law_mode == LawMode::kDiracAtLimitOde);
  CHECK(cfg.initial_path.kind == InitialPath::Kind::kConstant);
  CHECK(cfg.initial_path.value == 0.5);
  CHECK_FALSE(cfg.tamed);
  CHECK(cfg.seed == 18446744073709551615ULL);
  const ExperimentConfig again = parse_config(render_config(cfg));
  CHECK(render_config(again) == render_config(cfg));
}

TEST_CASE("initial paths") {
  const GridSpec g = make_grid(1.0, 10, 0.1);
  const Segment r = InitialPath{InitialPath::Kind::kLinearRamp, 2.0}.sample(g);
  CHECK(r.head()(0) == 0.0);
  CHECK(r.scalar(0) == doctest::Approx(-0.2));
  const Segment c = InitialPath{InitialPath::Kind::kConstant, 3.0}.sample(g);
  for (double v : c.raw()) CHECK(v == 3.0);
}

TEST_CASE("consistency sweep structure and determinism") {
  const ExperimentConfig cfg = small_config();
  const ModelSpec model = model_from_config(cfg);
  const StudyReport a = run_consistency_sweep(cfg, model);
  CHECK(a.records.size() == cfg.epsilons.size() * cfg.n_list.size() * static_cast<std::size_t>(cfg.replications));
  CHECK(a.cells.size() == 2);
  for (const auto& r : a.records) {
    CHECK(r.ok);
    CHECK(r.closed_form.has_value());
    CHECK(cfg.theta_box.contains(r.theta_hat));
  }
  ExperimentConfig threaded = cfg;
  threaded.workers = 3;
  const StudyReport b = run_consistency_sweep(threaded, model);
  CHECK(records_text(a) == records_text(b));
  const std::string csv = records_text(a);
  CHECK(csv.rfind("epsilon,n,rep,theta_hat_1,theta_hat_2,err_norm,method,runtime_ms\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + static_cast<long>(a.records.size()));
  ExperimentConfig other = cfg;
  other.seed = 12;
  CHECK(records_text(run_consistency_sweep(other, model)) != records_text(a));
}

TEST_CASE("a box collapsed onto theta0 gives zero error") {
  ExperimentConfig cfg = small_config();
  cfg.theta_box = ThetaBox(cfg.theta0, cfg.theta0);
  const StudyReport r = run_consistency_sweep(cfg, model_from_config(cfg));
  for (const auto& rec : r.records) CHECK(rec.err_norm == 0.0);
  for (const auto& c : r.cells) CHECK(c.median_error == 0.0);
}

TEST_CASE("a cell where every replication fails aborts the study") {
  ExperimentConfig cfg = small_config();
  ModelSpec model = model_from_config(cfg);
  model.sigma = [](const Segment&, const ParticleEnsemble&) { return Matrix::Zero(1, 1); };
  try {
    run_consistency_sweep(cfg, model);
    FAIL("expected the study to abort");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("epsilon=") != std::string::npos);
  }
}

TEST_CASE("dirac law mode runs and is recorded") {
  ExperimentConfig cfg = small_config();
  cfg.law_mode = LawMode::kDiracAtLimitOde;
  const StudyReport r = run_consistency_sweep(cfg, model_from_config(cfg));
  CHECK(r.records.size() == 6);
  const auto j = nlohmann::json::parse(summary_json(r, false));
  CHECK(j["law_mode"] == "dirac-at-limit-ode");
  CHECK(j["version"] == std::string(version()));
  CHECK(j["config"]["seed"] == 11);
  CHECK(j["record_count"] == 6);
  CHECK(j["monotonicity"].size() == 1);
}

TEST_CASE("normality study summaries") {
  ExperimentConfig cfg = small_config();
  cfg.epsilons = {0.01};
  cfg.replications = 6;
  cfg.reference_delta = 1e-3;
  const StudyReport r = run_normality_study(cfg, model_from_config(cfg));
  REQUIRE(r.target_cov.has_value());
  REQUIRE(r.info_matrix.has_value());
  CHECK((*r.target_cov - r.info_matrix->inverse()).norm() <= 1e-10 * r.target_cov->norm());
  const CellSummary& c = r.cells.front();
  CHECK(c.scaled_defined);
  CHECK(c.scaled_cov.rows() == 2);
  CHECK(c.skewness.size() == 2);
  CHECK(c.cov_rel_frobenius >= 0.0);
  const auto j = nlohmann::json::parse(summary_json(r, false));
  CHECK(j["target_cov"]["dims"] == nlohmann::json::array({2, 2}));
  CHECK(j["cells"][0].contains("scaled_cov"));

  // Without noise the scaled error is undefined and flagged.
  ExperimentConfig quiet = cfg;
  quiet.epsilons = {0.0};
  quiet.replications = 2;
  const StudyReport q = run_normality_study(quiet, model_from_config(quiet));
  CHECK_FALSE(q.cells.front().scaled_defined);
  for (const auto& rec : q.records) CHECK(rec.err_norm <= 1e-6);
}

TEST_CASE("rate study") {
  ExperimentConfig cfg = parse_config(kMinimal);
  cfg.n_list = {40, 80, 160};
  cfg.rate_refine = 3;
  const ModelSpec model = model_from_config(cfg);
  const StudyReport r = run_rate_study(cfg, model);
  CHECK(r.rate_points.size() == 3);
  REQUIRE(r.rate_slope.has_value());
  CHECK(r.rate_points[0].error > r.rate_points[2].error);

  ExperimentConfig two = cfg;
  two.n_list = {40, 80};
  CHECK_THROWS_AS(run_rate_study(two, model), Error);

  ModelSpec constant = model;
  constant.drift = [](const Segment&, const ParticleEnsemble&, const Vector&) { return Vector::Constant(1, 0.75); };
  ExperimentConfig exact = cfg;
  exact.tamed = false;
  const StudyReport e = run_rate_study(exact, constant);
  CHECK(e.rate_fit_skipped);
  CHECK_FALSE(e.rate_slope.has_value());
  for (const auto& p : e.rate_points) CHECK(p.error < 1e-12);
}

TEST_CASE("weak taming converges more slowly") {
  ExperimentConfig cfg = parse_config(kMinimal);
  cfg.n_list = {160, 320, 640, 1280, 2560};
  cfg.rate_refine = 3;
  const ModelSpec model = model_from_config(cfg);
  const double half = *run_rate_study(cfg, model).rate_slope;
  cfg.alpha = 0.1;
  const double weak = *run_rate_study(cfg, model).rate_slope;
  CHECK(half >= 0.4);
  CHECK(weak < half - 0.1);
}

TEST_CASE("single-dataset commands") {
  ExperimentConfig cfg = small_config();
  const ModelSpec model = model_from_config(cfg);
  const StudyReport est = run_estimate(cfg, model);
  CHECK(est.estimates.size() == 3);
  CHECK(est.records.size() == 3);
  const auto j = nlohmann::json::parse(estimation_result_json(est.estimates.front()));
  for (const char* key : {"theta_hat", "contrast_value", "method", "evaluations", "converged", "boundary_hit"}) {
    CHECK(j.contains(key));
  }
  const StudyReport sim = run_simulate(cfg, model);
  CHECK(sim.paths.size() == static_cast<std::size_t>(cfg.n_particles));
  const StudyReport ode = run_ode(cfg, model);
  CHECK(ode.paths.size() == 1);
  CHECK(ode.target_cov.has_value());
}

TEST_CASE("matrix JSON is row major with dims") {
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const auto j = nlohmann::json::parse(matrix_json(m));
  CHECK(j["dims"] == nlohmann::json::array({2, 3}));
  CHECK(j["data"][1][0] == 4.0);
}

TEST_CASE("reports are written to disk") {
  const auto dir = std::filesystem::temp_directory_path() / "mvlse_report_test";
  std::filesystem::remove_all(dir);
  ExperimentConfig cfg = small_config();
  const StudyReport r = run_consistency_sweep(cfg, model_from_config(cfg));
  write_report(r, dir.string(), true);
  CHECK(std::filesystem::exists(dir / "records.csv"));
  CHECK(std::filesystem::exists(dir / "summary.json"));
  std::ifstream in(dir / "records.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(row.back() != ',');  // timing column filled
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace mvlse
