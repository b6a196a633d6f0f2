// Copyright 2026 The qfedsim Authors.
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
/*
 * qfedsim C API.
 *
 * Every function that can fail returns a qfed_status; on failure the
 * message is available from qfed_last_error() on the same thread until the
 * next failing call. Handles are opaque and not thread-safe: use one handle
 * per thread or serialize access.
 */
#ifndef QFED_QFED_H
#define QFED_QFED_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(QFED_BUILDING_LIBRARY)
#    define QFED_API __declspec(dllexport)
#  else
#    define QFED_API __declspec(dllimport)
#  endif
#else
#  define QFED_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qfed_status {
    QFED_OK = 0,
    QFED_ERR_INVALID_GATE = 1,
    QFED_ERR_INVALID_CIRCUIT = 2,
    QFED_ERR_SHAPE = 3,
    QFED_ERR_INVALID_SHOTS = 4,
    QFED_ERR_DOMAIN = 5,
    QFED_ERR_CONFIG = 6,
    QFED_ERR_CALIBRATION = 7,
    QFED_ERR_DATA = 8,
    QFED_ERR_AGGREGATION = 9,
    QFED_ERR_ROUND = 10,
    QFED_ERR_IO = 11,
    QFED_ERR_USAGE = 12,
    /* verify-bounds ran but at least one check failed */
    QFED_CHECK_FAILED = 13,
    QFED_ERR_NULL = 14,
    QFED_ERR_INTERNAL = 15
} qfed_status;

typedef enum qfed_gate_kind {
    QFED_GATE_RX = 0,
    QFED_GATE_RY = 1,
    QFED_GATE_RZ = 2,
    QFED_GATE_CNOT = 3,
    QFED_GATE_CZ = 4,
    QFED_GATE_X = 5,
    QFED_GATE_Y = 6,
    QFED_GATE_Z = 7
} qfed_gate_kind;

typedef struct qfed_experiment qfed_experiment;
typedef struct qfed_state qfed_state;

typedef void (*qfed_progress_fn)(const char *message, void *user);

QFED_API const char *qfed_version(void);
QFED_API const char *qfed_last_error(void);
QFED_API const char *qfed_status_name(qfed_status status);

/* Experiments */

QFED_API qfed_status qfed_experiment_load(const char *path, qfed_experiment **out);
QFED_API qfed_status qfed_experiment_from_string(const char *text, qfed_experiment **out);
QFED_API void qfed_experiment_free(qfed_experiment *exp);

QFED_API qfed_status qfed_experiment_set_seed(qfed_experiment *exp, uint64_t seed);
QFED_API qfed_status qfed_experiment_set_output_dir(qfed_experiment *exp, const char *dir);
QFED_API qfed_status qfed_experiment_set_workers(qfed_experiment *exp, int workers);
QFED_API qfed_status qfed_experiment_set_progress(qfed_experiment *exp, qfed_progress_fn fn,
                                                  void *user);

/* The resolved configuration text. Valid until the handle is modified or freed. */
QFED_API const char *qfed_experiment_resolved(qfed_experiment *exp);

QFED_API qfed_status qfed_experiment_train(qfed_experiment *exp);
/* methods: comma-separated subset of qfl,pqfl,spqfl; NULL uses the config. */
QFED_API qfed_status qfed_experiment_compare(qfed_experiment *exp, const char *methods);
/* shots: NULL uses the config's sweep list. */
QFED_API qfed_status qfed_experiment_sweep_shots(qfed_experiment *exp, const int *shots,
                                                 size_t n_shots);
/* Returns QFED_CHECK_FAILED when the table contains a failed check. */
QFED_API qfed_status qfed_experiment_verify_bounds(qfed_experiment *exp);

/* Text table from the last command; empty before any command ran. */
QFED_API const char *qfed_experiment_report(const qfed_experiment *exp);
/* Final global parameters of the last train run. Writes min(cap, count) values. */
QFED_API qfed_status qfed_experiment_final_params(const qfed_experiment *exp, double *out,
                                                  size_t cap, size_t *count);

/* Statevector */

QFED_API qfed_status qfed_state_new(int n_qubits, qfed_state **out);
QFED_API void qfed_state_free(qfed_state *state);
QFED_API int qfed_state_qubits(const qfed_state *state);
/* q1 is ignored for one-qubit gates, angle for non-rotations. */
QFED_API qfed_status qfed_state_apply(qfed_state *state, qfed_gate_kind kind, int q0, int q1,
                                      double angle);
QFED_API qfed_status qfed_state_expectation_z(const qfed_state *state, int qubit, double *out);
/* Interleaved re, im pairs; cap counts doubles and must be >= 2 * 2^n. */
QFED_API qfed_status qfed_state_amplitudes(const qfed_state *state, double *out, size_t cap);

/* Bounds */

typedef struct qfed_bound_params {
    double nu;
    double n_outcomes;
    double n_params;
    double trace_h2;
    double shots;
    double n_clients;
    double eta;
    double lambda;
    double mu;
    double smoothness;
    double smoothness_p;
    double grad_bound;
    double local_steps;
    double x_bar;
    double pl_constant;
} qfed_bound_params;

QFED_API void qfed_bound_params_default(qfed_bound_params *out);
QFED_API qfed_status qfed_lemma1_variance(const qfed_bound_params *p, double *out);
QFED_API qfed_status qfed_lemma1_aggregate_bound(const qfed_bound_params *p, double *out);
QFED_API qfed_status qfed_gap_bound(const qfed_bound_params *p, int steps, double initial_gap,
                                    double *out);
QFED_API qfed_status qfed_phi_k(const qfed_bound_params *p, double *out);
QFED_API qfed_status qfed_theorem1_rate(const qfed_bound_params *p, int rounds,
                                        double initial_distance_sq, double *out);
QFED_API qfed_status qfed_shot_noise_iterations(double delta, double mu, double smoothness,
                                                double variance, double c, long *out);

#ifdef __cplusplus
}
#endif

#endif
