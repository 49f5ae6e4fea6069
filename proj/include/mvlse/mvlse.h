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

/* C interface of the mvlse library. Every call returns an mvlse_status;
 * mvlse_last_error() describes the most recent failure on the calling
 * thread. Handles are opaque and owned by the caller. */

#ifndef MVLSE_MVLSE_H_
#define MVLSE_MVLSE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MVLSE_API __declspec(dllexport)
#else
#define MVLSE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  MVLSE_OK = 0,
  MVLSE_ERR_ARGUMENT = 1,
  MVLSE_ERR_CONFIG = 2,
  MVLSE_ERR_NUMERIC = 3,
  MVLSE_ERR_IO = 4,
  MVLSE_ERR_INTERNAL = 5
} mvlse_status;

typedef enum {
  MVLSE_STUDY_CONSISTENCY = 0,
  MVLSE_STUDY_NORMALITY = 1,
  MVLSE_STUDY_RATE = 2,
  MVLSE_STUDY_ESTIMATE = 3,
  MVLSE_STUDY_SIMULATE = 4,
  MVLSE_STUDY_ODE = 5
} mvlse_study;

typedef struct mvlse_config mvlse_config;
typedef struct mvlse_model mvlse_model;
typedef struct mvlse_report mvlse_report;

/* Scalar drift and diffusion hooks for custom models (d = m = 1). A segment
 * is passed as its M+1 node values on [-r0, 0]; the law as `count` such
 * segments laid out back to back. Return 0 on success. */
typedef int (*mvlse_drift_fn)(const double* segment, size_t nodes, const double* law, size_t count,
                              const double* theta, size_t p, double* out, void* user_data);
typedef int (*mvlse_sigma_fn)(const double* segment, size_t nodes, const double* law, size_t count, double* out,
                              void* user_data);
/* Gradient of the drift in theta, written as p values. */
typedef int (*mvlse_grad_fn)(const double* segment, size_t nodes, const double* law, size_t count,
                             const double* theta, size_t p, double* out, void* user_data);

MVLSE_API const char* mvlse_version(void);
MVLSE_API const char* mvlse_last_error(void);

MVLSE_API mvlse_status mvlse_config_parse(const char* text, mvlse_config** out);
MVLSE_API mvlse_status mvlse_config_load(const char* path, mvlse_config** out);
MVLSE_API mvlse_status mvlse_config_set_seed(mvlse_config* cfg, uint64_t seed);
MVLSE_API mvlse_status mvlse_config_set_workers(mvlse_config* cfg, int workers);
/* Canonical text; release with mvlse_string_free. */
MVLSE_API mvlse_status mvlse_config_render(const mvlse_config* cfg, char** out);
MVLSE_API void mvlse_config_free(mvlse_config* cfg);

/* The shipped two-parameter example for the given delay length. */
MVLSE_API mvlse_status mvlse_model_example(double r0, mvlse_model** out);
/* A scalar model linear or nonlinear in theta; `linear_in_theta` enables the
 * closed-form estimator. */
MVLSE_API mvlse_status mvlse_model_custom(const char* name, size_t p, mvlse_drift_fn drift, mvlse_sigma_fn sigma,
                                          mvlse_grad_fn grad, int linear_in_theta, void* user_data,
                                          mvlse_model** out);
MVLSE_API void mvlse_model_free(mvlse_model* model);

/* Runs a study; a NULL model selects the one named by the config. */
MVLSE_API mvlse_status mvlse_study_run(mvlse_study kind, const mvlse_config* cfg, const mvlse_model* model,
                                       mvlse_report** out);
MVLSE_API mvlse_status mvlse_report_write(const mvlse_report* report, const char* dir, int with_timing);
MVLSE_API mvlse_status mvlse_report_records_csv(const mvlse_report* report, int with_timing, char** out);
MVLSE_API mvlse_status mvlse_report_summary_json(const mvlse_report* report, int with_timing, char** out);
MVLSE_API size_t mvlse_report_record_count(const mvlse_report* report);
MVLSE_API void mvlse_report_free(mvlse_report* report);

MVLSE_API void mvlse_string_free(char* s);

/* b / (1 + delta^alpha |b|) for a scalar drift value. */
MVLSE_API mvlse_status mvlse_tame_drift(double b, double delta, double alpha, double* out);

#ifdef __cplusplus
}
#endif

#endif /* MVLSE_MVLSE_H_ */
