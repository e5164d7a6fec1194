// Copyright 2026 The qwsample Authors
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

#ifndef QWSAMPLE_QWSAMPLE_H_
#define QWSAMPLE_QWSAMPLE_H_

#ifdef __cplusplus
extern "C" {
#endif

#include <stddef.h>
#include <stdint.h>

#if defined(QWS_BUILDING_LIBRARY)
#define QWS_API __attribute__((visibility("default")))
#else
#define QWS_API
#endif

/* Status codes. Nonzero values match the library's internal error codes. */
typedef enum qws_status {
  QWS_OK = 0,
  QWS_ERR_INVALID_ARGUMENT = 1,
  QWS_ERR_INVALID_DIMENSION = 2,
  QWS_ERR_DIMENSION_MISMATCH = 3,
  QWS_ERR_NOT_POSITIVE = 4,
  QWS_ERR_NUMERICAL = 5,
  QWS_ERR_CONVERGENCE = 6,
  QWS_ERR_IO = 7,
  QWS_ERR_FORMAT = 8,
  QWS_ERR_CONFIG = 9,
  QWS_ERR_INTERNAL = 100
} qws_status;

/* Opaque handles */

typedef struct qws_config qws_config;
typedef struct qws_target qws_target;
typedef struct qws_proposal qws_proposal;
typedef struct qws_sample qws_sample;

typedef struct qws_sample_info {
  int m;
  uint64_t proposed;
  uint64_t physical;
  uint64_t accepted;
  double p_acc;
  double log_C;
} qws_sample_info;

QWS_API const char* qws_version(void);
/* Message of the last failed call on this thread; "" after success. */
QWS_API const char* qws_last_error(void);
QWS_API const char* qws_status_name(qws_status status);

/* Strings returned through char** are malloc()ed; release with qws_string_free. */
QWS_API void qws_string_free(char* s);

/* Run configuration */

QWS_API qws_status qws_config_create(qws_config** out);
QWS_API void qws_config_destroy(qws_config* cfg);
QWS_API qws_status qws_config_load_file(qws_config* cfg, const char* path);
QWS_API qws_status qws_config_load_string(qws_config* cfg, const char* text);
/* key is "section.key", for example "proposal.kappa". */
QWS_API qws_status qws_config_set(qws_config* cfg, const char* key, const char* value);
QWS_API qws_status qws_config_get(const qws_config* cfg, const char* key, char** value);
QWS_API qws_status qws_config_validate(const qws_config* cfg);
/* Runs the configured task; *manifest_json may be NULL when not wanted. */
QWS_API qws_status qws_run(const qws_config* cfg, char** manifest_json);

/* States cross the API in the binary layout: m diagonal reals, then the
 (re, im) pairs of the strict upper triangle row by row. m*m doubles. */

/* Likelihood targets */

QWS_API qws_status qws_target_create(const char* pom_name, const double* counts, size_t k, qws_target** out);
QWS_API void qws_target_destroy(qws_target* t);
QWS_API int qws_target_dim(const qws_target* t);
QWS_API qws_status qws_target_log_density(const qws_target* t, const double* layout, size_t len, double* out);
/* Writes the ML state layout and the maximal log-likelihood. */
QWS_API qws_status qws_target_ml(const qws_target* t, double* layout, size_t len, double* log_f_max);

/* Proposals */

/* Unit-covariance Wishart proposal; delta_layout may be NULL for no shift. */
QWS_API qws_status qws_proposal_create(int m, int n, double kappa, const double* delta_layout, size_t len,
                                       qws_proposal** out);
/* Peak and shift placed relative to the target's ML estimate. */
QWS_API qws_status qws_proposal_from_estimate(const qws_target* t, int n, double kappa, double x1, double x2,
                                              qws_proposal** out);
QWS_API void qws_proposal_destroy(qws_proposal* p);
QWS_API qws_status qws_proposal_log_density(const qws_proposal* p, const double* layout, size_t len, double* out);
/* Draw number index of a run of total draws under seed. physical may be NULL. */
QWS_API qws_status qws_proposal_draw(const qws_proposal* p, uint64_t seed, uint64_t total, uint64_t index,
                                     double* layout, size_t len, double* log_g, int* physical);

/* Target samples */

QWS_API qws_status qws_sample_target(const qws_proposal* p, const qws_target* t, uint64_t total, uint64_t seed,
                                     int threads, qws_sample** out);
QWS_API void qws_sample_destroy(qws_sample* s);
QWS_API qws_status qws_sample_info_get(const qws_sample* s, qws_sample_info* info);
QWS_API qws_status qws_sample_state(const qws_sample* s, uint64_t k, double* layout, size_t len);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* QWSAMPLE_QWSAMPLE_H_ */
