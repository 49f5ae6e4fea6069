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

#include "mvlse/mvlse.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "mvlse/error.hpp"
#include "mvlse/experiments.hpp"

struct mvlse_config {
  mvlse::ExperimentConfig cfg;
};

struct mvlse_model {
  mvlse::ModelSpec spec;
};

struct mvlse_report {
  mvlse::StudyReport report;
};

namespace {

thread_local std::string g_last_error;

mvlse_status fail(mvlse_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

mvlse_status status_of(const mvlse::Error& e) {
  if (e.kind() == mvlse::ErrorKind::kIo) return MVLSE_ERR_IO;
  return e.is_config_error() ? MVLSE_ERR_CONFIG : MVLSE_ERR_NUMERIC;
}

// Runs `body`, translating exceptions into status codes.
template <typename Body>
mvlse_status guarded(Body&& body) {
  try {
    body();
    g_last_error.clear();
    return MVLSE_OK;
  } catch (const mvlse::Error& e) {
    return fail(status_of(e), std::string(mvlse::to_string(e.kind())) + ": " + e.what());
  } catch (const std::bad_alloc&) {
    return fail(MVLSE_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MVLSE_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<double> flatten(const mvlse::ParticleEnsemble& mu) {
  std::vector<double> out;
  for (const auto& s : mu) out.insert(out.end(), s.raw().begin(), s.raw().end());
  return out;
}

void check_hook(int rc, const char* what) {
  if (rc != 0) throw mvlse::Error(mvlse::ErrorKind::kDomain, std::string(what) + " hook returned " + std::to_string(rc));
}

}  // namespace

extern "C" {

const char* mvlse_version(void) { return mvlse::version().data(); }

const char* mvlse_last_error(void) { return g_last_error.c_str(); }

mvlse_status mvlse_config_parse(const char* text, mvlse_config** out) {
  if (text == nullptr || out == nullptr) return fail(MVLSE_ERR_ARGUMENT, "null argument");
  return guarded([&] { *out = new mvlse_config{mvlse::parse_config(text)}; });
}

mvlse_status mvlse_config_load(const char* path, mvlse_config** out) {
  if (path == nullptr || out == nullptr) return fail(MVLSE_ERR_ARGUMENT, "null argument");
  return guarded([&] { *out = new mvlse_config{mvlse::load_config(path)}; });
}

mvlse_status mvlse_config_set_seed(mvlse_config* cfg, uint64_t seed) {
  if (cfg == nullptr) return fail(MVLSE_ERR_ARGUMENT, "null config");
  cfg->cfg.seed = seed;
  return MVLSE_OK;
}

mvlse_status mvlse_config_set_workers(mvlse_config* cfg, int workers) {
  if (cfg == nullptr) return fail(MVLSE_ERR_ARGUMENT, "null config");
  if (workers < 0) return fail(MVLSE_ERR_ARGUMENT, "workers must be non-negative");
  cfg->cfg.workers = workers;
  return MVLSE_OK;
}

mvlse_status mvlse_config_render(const mvlse_config* cfg, char** out) {
  if (cfg == nullptr || out == nullptr) return fail(MVLSE_ERR_ARGUMENT, "null argument");
  return guarded([&] { *out = dup_string(mvlse::render_config(cfg->cfg)); });
}

void mvlse_config_free(mvlse_config* cfg) { delete cfg; }

mvlse_status mvlse_model_example(double r0, mvlse_model** out) {
  if (out == nullptr) return fail(MVLSE_ERR_ARGUMENT, "null argument");
  return guarded([&] { *out = new mvlse_model{mvlse::example_model(r0)}; });
}

mvlse_status mvlse_model_custom(const char* name, size_t p, mvlse_drift_fn drift, mvlse_sigma_fn sigma,
                                mvlse_grad_fn grad, int linear_in_theta, void* user_data, mvlse_model** out) {
  if (out == nullptr || drift == nullptr || sigma == nullptr || grad == nullptr) {
    return fail(MVLSE_ERR_ARGUMENT, "null argument");
  }
  if (p == 0) return fail(MVLSE_ERR_ARGUMENT, "parameter dimension must be positive");
  return guarded([&] {
    mvlse::ModelSpec spec;
    spec.name = name != nullptr ? name : "custom";
    spec.d = 1;
    spec.m = 1;
    spec.p = static_cast<int>(p);
    spec.is_linear_in_theta = linear_in_theta != 0;
    spec.drift = [drift, user_data](const mvlse::Segment& seg, const mvlse::ParticleEnsemble& mu,
                                    const mvlse::Vector& theta) {
      const auto law = flatten(mu);
      double v = 0.0;
      check_hook(drift(seg.raw().data(), seg.raw().size(), law.data(), mu.size(), theta.data(),
                       static_cast<size_t>(theta.size()), &v, user_data),
                 "drift");
      return mvlse::Vector::Constant(1, v);
    };
    spec.sigma = [sigma, user_data](const mvlse::Segment& seg, const mvlse::ParticleEnsemble& mu) {
      const auto law = flatten(mu);
      double v = 0.0;
      check_hook(sigma(seg.raw().data(), seg.raw().size(), law.data(), mu.size(), &v, user_data), "sigma");
      return mvlse::Matrix::Constant(1, 1, v);
    };
    spec.grad_theta_drift = [grad, user_data](const mvlse::Segment& seg, const mvlse::ParticleEnsemble& mu,
                                              const mvlse::Vector& theta) {
      const auto law = flatten(mu);
      mvlse::Matrix g(1, theta.size());
      check_hook(grad(seg.raw().data(), seg.raw().size(), law.data(), mu.size(), theta.data(),
                      static_cast<size_t>(theta.size()), g.data(), user_data),
                 "gradient");
      return g;
    };
    *out = new mvlse_model{std::move(spec)};
  });
}

void mvlse_model_free(mvlse_model* model) { delete model; }

mvlse_status mvlse_study_run(mvlse_study kind, const mvlse_config* cfg, const mvlse_model* model,
                             mvlse_report** out) {
  if (cfg == nullptr || out == nullptr) return fail(MVLSE_ERR_ARGUMENT, "null argument");
  if (kind < MVLSE_STUDY_CONSISTENCY || kind > MVLSE_STUDY_ODE) return fail(MVLSE_ERR_ARGUMENT, "unknown study");
  return guarded([&] {
    const mvlse::ModelSpec spec = model != nullptr ? model->spec : mvlse::model_from_config(cfg->cfg);
    auto report = std::make_unique<mvlse_report>();
    report->report = mvlse::run_study(static_cast<mvlse::StudyKind>(kind), cfg->cfg, spec);
    *out = report.release();
  });
}

mvlse_status mvlse_report_write(const mvlse_report* report, const char* dir, int with_timing) {
  if (report == nullptr || dir == nullptr) return fail(MVLSE_ERR_ARGUMENT, "null argument");
  return guarded([&] { mvlse::write_report(report->report, dir, with_timing != 0); });
}

mvlse_status mvlse_report_records_csv(const mvlse_report* report, int with_timing, char** out) {
  if (report == nullptr || out == nullptr) return fail(MVLSE_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    std::ostringstream os;
    mvlse::write_records_csv(os, report->report, with_timing != 0);
    *out = dup_string(os.str());
  });
}

mvlse_status mvlse_report_summary_json(const mvlse_report* report, int with_timing, char** out) {
  if (report == nullptr || out == nullptr) return fail(MVLSE_ERR_ARGUMENT, "null argument");
  return guarded([&] { *out = dup_string(mvlse::summary_json(report->report, with_timing != 0)); });
}

size_t mvlse_report_record_count(const mvlse_report* report) {
  return report != nullptr ? report->report.records.size() : 0;
}

void mvlse_report_free(mvlse_report* report) { delete report; }

void mvlse_string_free(char* s) { std::free(s); }

mvlse_status mvlse_tame_drift(double b, double delta, double alpha, double* out) {
  if (out == nullptr) return fail(MVLSE_ERR_ARGUMENT, "null argument");
  if (!(delta > 0.0)) return fail(MVLSE_ERR_ARGUMENT, "delta must be positive");
  return guarded([&] { *out = mvlse::tame_drift(mvlse::Vector::Constant(1, b), delta, alpha)[0]; });
}

}  // extern "C"
