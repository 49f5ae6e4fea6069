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
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "mvlse/error.hpp"
#include "mvlse/experiments.hpp"

namespace mvlse {

namespace {

using nlohmann::json;

// Shortest text that parses back to the same double.
std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(jnum(v[i]));
  return out;
}

json mat_json(const Matrix& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(jnum(m(r, c)));
    data.push_back(std::move(row));
  }
  return json{{"dims", {m.rows(), m.cols()}}, {"data", std::move(data)}};
}

json config_json(const ExperimentConfig& cfg) {
  json c;
  c["model"] = cfg.model;
  c["r0"] = cfg.r0;
  c["T"] = cfg.T;
  c["n_list"] = cfg.n_list;
  c["theta0"] = vec_json(cfg.theta0);
  c["theta0_note"] = "experiment setting, not a published value";
  c["theta_box"] = {{"lower", vec_json(cfg.theta_box.lower)}, {"upper", vec_json(cfg.theta_box.upper)}};
  c["epsilons"] = cfg.epsilons;
  c["replications"] = cfg.replications;
  c["n_particles"] = cfg.n_particles;
  c["alpha"] = cfg.alpha;
  c["tamed"] = cfg.tamed;
  c["law_mode"] = std::string(to_string(cfg.law_mode));
  c["seed"] = cfg.seed;
  c["initial_path"] = cfg.initial_path.to_string();
  c["method"] = std::string(to_string(cfg.method));
  c["grid_points"] = cfg.grid_points;
  c["nm_tolerance"] = cfg.nm_tolerance;
  c["nm_max_evaluations"] = cfg.nm_max_evaluations;
  c["rate_refine"] = cfg.rate_refine;
  c["reference_delta"] = cfg.reference_delta;
  c["text"] = render_config(cfg);
  return c;
}

json result_json(const EstimationResult& r) {
  return json{{"theta_hat", vec_json(r.theta_hat)},
              {"contrast_value", jnum(r.contrast_value)},
              {"method", std::string(to_string(r.method))},
              {"evaluations", r.evaluations},
              {"converged", r.converged},
              {"boundary_hit", r.boundary_hit}};
}

}  // namespace

void write_records_csv(std::ostream& os, const StudyReport& report, bool with_timing) {
  const auto p = report.config.theta0.size();
  os << "epsilon,n,rep";
  for (Eigen::Index i = 1; i <= p; ++i) os << ",theta_hat_" << i;
  os << ",err_norm,method,runtime_ms\n";
  for (const auto& r : report.records) {
    os << num(r.epsilon) << ',' << r.n << ',' << r.rep;
    for (Eigen::Index i = 0; i < p; ++i) os << ',' << (i < r.theta_hat.size() ? num(r.theta_hat[i]) : "nan");
    os << ',' << num(r.err_norm) << ',' << r.method << ',';
    if (with_timing) os << num(r.runtime_ms);
    os << '\n';
  }
}

std::string summary_json(const StudyReport& report, bool with_timing) {
  json s;
  s["version"] = std::string(version());
  s["study"] = std::string(to_string(report.kind));
  s["law_mode"] = std::string(to_string(report.config.law_mode));
  s["config"] = config_json(report.config);
  s["optimizer"] = {{"grid_points_per_axis", report.config.grid_points},
                    {"nelder_mead_tolerance", report.config.nm_tolerance},
                    {"nelder_mead_max_evaluations", report.config.nm_max_evaluations}};
  s["record_count"] = report.records.size();

  json cells = json::array();
  for (const auto& c : report.cells) {
    json j{{"epsilon", c.epsilon},
           {"n", c.n},
           {"succeeded", c.succeeded},
           {"median_error", jnum(c.median_error)},
           {"mean_error", jnum(c.mean_error)},
           {"boundary_hits", c.boundary_hits}};
    if (c.median_closed_form_error) j["median_closed_form_error"] = jnum(*c.median_closed_form_error);
    if (report.kind == StudyKind::kNormality) {
      j["scaled_defined"] = c.scaled_defined;
      if (c.scaled_defined) {
        j["scaled_mean"] = vec_json(c.scaled_mean);
        j["scaled_cov"] = mat_json(c.scaled_cov);
        j["skewness"] = vec_json(c.skewness);
        j["excess_kurtosis"] = vec_json(c.excess_kurtosis);
        j["cov_rel_frobenius"] = jnum(c.cov_rel_frobenius);
        j["mean_within_clt"] = c.mean_within_clt;
      }
    }
    cells.push_back(std::move(j));
  }
  s["cells"] = std::move(cells);

  if (!report.monotone_by_n.empty()) {
    json mono = json::array();
    for (std::size_t j = 0; j < report.monotone_by_n.size(); ++j) {
      mono.push_back({{"n", report.config.n_list[j]},
                      {"strictly_decreasing_in_epsilon", static_cast<bool>(report.monotone_by_n[j])},
                      {"median_ratio_largest_to_smallest_epsilon", jnum(report.median_ratio_by_n[j])}});
    }
    s["monotonicity"] = std::move(mono);
  }
  if (report.info_matrix) s["info_matrix"] = mat_json(*report.info_matrix);
  if (report.target_cov) s["target_cov"] = mat_json(*report.target_cov);
  if (!report.rate_points.empty()) {
    json pts = json::array();
    for (const auto& p : report.rate_points) pts.push_back({{"n", p.n}, {"delta", p.delta}, {"error", jnum(p.error)}});
    s["rate"] = {{"points", std::move(pts)},
                 {"slope", report.rate_slope ? jnum(*report.rate_slope) : json(nullptr)},
                 {"fit_skipped", report.rate_fit_skipped}};
  }
  if (!report.estimates.empty()) {
    json est = json::array();
    for (const auto& e : report.estimates) est.push_back(result_json(e));
    s["estimates"] = std::move(est);
  }
  if (with_timing) {
    double total = 0.0;
    for (const auto& r : report.records) total += r.runtime_ms;
    s["total_runtime_ms"] = total;
  }
  return s.dump(2) + "\n";
}

void write_rate_csv(std::ostream& os, const StudyReport& report) {
  os << "n,delta,error\n";
  for (const auto& p : report.rate_points) os << p.n << ',' << num(p.delta) << ',' << num(p.error) << '\n';
}

void write_report(const StudyReport& report, const std::string& dir, bool with_timing) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create output directory '" + dir + "': " + ec.message());
  auto open = [&](const char* name) {
    std::ofstream f(fs::path(dir) / name, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::kIo, "cannot write " + (fs::path(dir) / name).string());
    return f;
  };
  {
    auto f = open("records.csv");
    write_records_csv(f, report, with_timing);
  }
  {
    auto f = open("summary.json");
    f << summary_json(report, with_timing);
  }
  if (!report.rate_points.empty()) {
    auto f = open("rate.csv");
    write_rate_csv(f, report);
  }
  if (!report.paths.empty()) {
    auto f = open("paths.csv");
    write_paths_csv(f, report.paths);
  }
}

std::string estimation_result_json(const EstimationResult& result) { return result_json(result).dump(); }

std::string matrix_json(const Matrix& m) { return mat_json(m).dump(); }

}  // namespace mvlse
