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
#include "qfed/qfed.h"

#include "config.hpp"
#include "error.hpp"
#include "experiment.hpp"
#include "statevector.hpp"
#include "theory.hpp"

#include <cstring>
#include <exception>
#include <new>
#include <sstream>
#include <string>

struct qfed_experiment {
    qfed::ExperimentConfig config;
    std::string resolved;
    std::string report;
    qfed::ModelParams final_params;
    qfed_progress_fn progress = nullptr;
    void *progress_user = nullptr;
};

struct qfed_state {
    qfed::StateVector sv;
};

namespace {

thread_local std::string g_last_error;

qfed_status status_of(qfed::ErrorCode code) {
    using qfed::ErrorCode;
    switch (code) {
    case ErrorCode::InvalidGate: return QFED_ERR_INVALID_GATE;
    case ErrorCode::InvalidCircuit: return QFED_ERR_INVALID_CIRCUIT;
    case ErrorCode::Shape: return QFED_ERR_SHAPE;
    case ErrorCode::InvalidShots: return QFED_ERR_INVALID_SHOTS;
    case ErrorCode::Domain: return QFED_ERR_DOMAIN;
    case ErrorCode::Config: return QFED_ERR_CONFIG;
    case ErrorCode::CalibrationFormat: return QFED_ERR_CALIBRATION;
    case ErrorCode::DataFormat: return QFED_ERR_DATA;
    case ErrorCode::Aggregation: return QFED_ERR_AGGREGATION;
    case ErrorCode::Round: return QFED_ERR_ROUND;
    case ErrorCode::Io: return QFED_ERR_IO;
    case ErrorCode::Usage: return QFED_ERR_USAGE;
    }
    return QFED_ERR_INTERNAL;
}

qfed_status set_error(qfed_status status, std::string message) {
    g_last_error = std::move(message);
    return status;
}

template <typename F>
qfed_status guarded(F &&f) {
    try {
        return f();
    } catch (const qfed::Error &e) {
        return set_error(status_of(e.code()), e.what());
    } catch (const std::bad_alloc &) {
        return set_error(QFED_ERR_INTERNAL, "out of memory");
    } catch (const std::exception &e) {
        return set_error(QFED_ERR_INTERNAL, e.what());
    }
}

qfed_status null_arg(const char *what) {
    return set_error(QFED_ERR_NULL, std::string(what) + " is null");
}

qfed::ProgressFn progress_of(const qfed_experiment *exp) {
    if (!exp->progress) return {};
    auto fn = exp->progress;
    void *user = exp->progress_user;
    return [fn, user](const std::string &msg) { fn(msg.c_str(), user); };
}

qfed::theory::BoundParams to_bounds(const qfed_bound_params &p) {
    qfed::theory::BoundParams b;
    b.nu = p.nu;
    b.n_outcomes = p.n_outcomes;
    b.n_params = p.n_params;
    b.trace_h2 = p.trace_h2;
    b.shots = p.shots;
    b.n_clients = p.n_clients;
    b.eta = p.eta;
    b.lambda = p.lambda;
    b.mu = p.mu;
    b.smoothness = p.smoothness;
    b.smoothness_p = p.smoothness_p;
    b.grad_bound = p.grad_bound;
    b.local_steps = p.local_steps;
    b.x_bar = p.x_bar;
    b.pl_constant = p.pl_constant;
    return b;
}

qfed_status make_experiment(qfed::ExperimentConfig config, qfed_experiment **out) {
    auto *exp = new qfed_experiment;
    exp->config = std::move(config);
    *out = exp;
    return QFED_OK;
}

} // namespace

extern "C" {

const char *qfed_version(void) { return "0.1.0"; }

const char *qfed_last_error(void) { return g_last_error.c_str(); }

const char *qfed_status_name(qfed_status status) {
    switch (status) {
    case QFED_OK: return "ok";
    case QFED_ERR_INVALID_GATE: return "invalid gate";
    case QFED_ERR_INVALID_CIRCUIT: return "invalid circuit";
    case QFED_ERR_SHAPE: return "shape mismatch";
    case QFED_ERR_INVALID_SHOTS: return "invalid shot count";
    case QFED_ERR_DOMAIN: return "domain error";
    case QFED_ERR_CONFIG: return "config error";
    case QFED_ERR_CALIBRATION: return "calibration format error";
    case QFED_ERR_DATA: return "data format error";
    case QFED_ERR_AGGREGATION: return "aggregation error";
    case QFED_ERR_ROUND: return "round error";
    case QFED_ERR_IO: return "i/o error";
    case QFED_ERR_USAGE: return "usage error";
    case QFED_CHECK_FAILED: return "check failed";
    case QFED_ERR_NULL: return "null argument";
    case QFED_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

qfed_status qfed_experiment_load(const char *path, qfed_experiment **out) {
    if (!path) return null_arg("path");
    if (!out) return null_arg("out");
    return guarded([&] { return make_experiment(qfed::parse_config(path), out); });
}

qfed_status qfed_experiment_from_string(const char *text, qfed_experiment **out) {
    if (!text) return null_arg("text");
    if (!out) return null_arg("out");
    return guarded([&] { return make_experiment(qfed::parse_config_text(text), out); });
}

void qfed_experiment_free(qfed_experiment *exp) { delete exp; }

qfed_status qfed_experiment_set_seed(qfed_experiment *exp, uint64_t seed) {
    if (!exp) return null_arg("experiment");
    exp->config.seed = seed;
    return QFED_OK;
}

qfed_status qfed_experiment_set_output_dir(qfed_experiment *exp, const char *dir) {
    if (!exp) return null_arg("experiment");
    if (!dir) return null_arg("dir");
    exp->config.output_dir = dir;
    return QFED_OK;
}

qfed_status qfed_experiment_set_workers(qfed_experiment *exp, int workers) {
    if (!exp) return null_arg("experiment");
    if (workers < 1) return set_error(QFED_ERR_CONFIG, "workers must be >= 1");
    exp->config.fed.workers = workers;
    return QFED_OK;
}

qfed_status qfed_experiment_set_progress(qfed_experiment *exp, qfed_progress_fn fn, void *user) {
    if (!exp) return null_arg("experiment");
    exp->progress = fn;
    exp->progress_user = user;
    return QFED_OK;
}

const char *qfed_experiment_resolved(qfed_experiment *exp) {
    if (!exp) return "";
    exp->resolved = qfed::render_config(exp->config);
    return exp->resolved.c_str();
}

qfed_status qfed_experiment_train(qfed_experiment *exp) {
    if (!exp) return null_arg("experiment");
    return guarded([&] {
        auto r = qfed::cmd_train(exp->config, exp->config.output_dir, progress_of(exp));
        exp->final_params = r.final_params;
        std::ostringstream text;
        text << "rounds " << r.reports.size();
        if (!r.reports.empty()) {
            text << ", final loss " << r.reports.back().global_loss << ", final accuracy "
                 << r.reports.back().global_acc;
        }
        text << "\n";
        exp->report = text.str();
        return QFED_OK;
    });
}

qfed_status qfed_experiment_compare(qfed_experiment *exp, const char *methods) {
    if (!exp) return null_arg("experiment");
    return guarded([&] {
        std::vector<qfed::Method> list = exp->config.compare_methods;
        if (methods) {
            list.clear();
            std::istringstream in(methods);
            std::string item;
            while (std::getline(in, item, ',')) {
                if (!item.empty()) list.push_back(qfed::parse_method(item));
            }
        }
        auto r = qfed::cmd_compare(exp->config, list, exp->config.output_dir, progress_of(exp));
        exp->report = r.table;
        return QFED_OK;
    });
}

qfed_status qfed_experiment_sweep_shots(qfed_experiment *exp, const int *shots, size_t n_shots) {
    if (!exp) return null_arg("experiment");
    return guarded([&] {
        std::vector<int> list = exp->config.sweep_shots;
        if (shots) list.assign(shots, shots + n_shots);
        auto r = qfed::cmd_sweep_shots(exp->config, list, exp->config.output_dir,
                                       progress_of(exp));
        exp->report = r.table;
        return QFED_OK;
    });
}

qfed_status qfed_experiment_verify_bounds(qfed_experiment *exp) {
    if (!exp) return null_arg("experiment");
    return guarded([&] {
        auto r = qfed::cmd_verify_bounds(exp->config, exp->config.output_dir, progress_of(exp));
        exp->report = r.table;
        if (!r.all_pass) return set_error(QFED_CHECK_FAILED, "one or more bound checks failed");
        return QFED_OK;
    });
}

const char *qfed_experiment_report(const qfed_experiment *exp) {
    return exp ? exp->report.c_str() : "";
}

qfed_status qfed_experiment_final_params(const qfed_experiment *exp, double *out, size_t cap,
                                         size_t *count) {
    if (!exp) return null_arg("experiment");
    const auto &theta = exp->final_params.theta;
    if (count) *count = theta.size();
    if (out) {
        const size_t n = cap < theta.size() ? cap : theta.size();
        std::memcpy(out, theta.data(), n * sizeof(double));
    }
    return QFED_OK;
}

qfed_status qfed_state_new(int n_qubits, qfed_state **out) {
    if (!out) return null_arg("out");
    return guarded([&] {
        *out = new qfed_state{qfed::StateVector(n_qubits)};
        return QFED_OK;
    });
}

void qfed_state_free(qfed_state *state) { delete state; }

int qfed_state_qubits(const qfed_state *state) { return state ? state->sv.n_qubits() : 0; }

qfed_status qfed_state_apply(qfed_state *state, qfed_gate_kind kind, int q0, int q1,
                             double angle) {
    if (!state) return null_arg("state");
    return guarded([&] {
        qfed::Gate g;
        switch (kind) {
        case QFED_GATE_RX: g = qfed::Gate::rx(q0, angle); break;
        case QFED_GATE_RY: g = qfed::Gate::ry(q0, angle); break;
        case QFED_GATE_RZ: g = qfed::Gate::rz(q0, angle); break;
        case QFED_GATE_CNOT: g = qfed::Gate::cnot(q0, q1); break;
        case QFED_GATE_CZ: g = qfed::Gate::cz(q0, q1); break;
        case QFED_GATE_X: g = qfed::Gate::x(q0); break;
        case QFED_GATE_Y: g = qfed::Gate::y(q0); break;
        case QFED_GATE_Z: g = qfed::Gate::z(q0); break;
        default: return set_error(QFED_ERR_INVALID_GATE, "unknown gate kind");
        }
        state->sv.apply_checked(g);
        return QFED_OK;
    });
}

qfed_status qfed_state_expectation_z(const qfed_state *state, int qubit, double *out) {
    if (!state) return null_arg("state");
    if (!out) return null_arg("out");
    return guarded([&] {
        *out = qfed::expectation_z(state->sv, qubit);
        return QFED_OK;
    });
}

qfed_status qfed_state_amplitudes(const qfed_state *state, double *out, size_t cap) {
    if (!state) return null_arg("state");
    if (!out) return null_arg("out");
    const auto amps = state->sv.amplitudes();
    if (cap < 2 * amps.size()) {
        return set_error(QFED_ERR_SHAPE, "buffer holds " + std::to_string(cap) + " doubles, need " +
                                             std::to_string(2 * amps.size()));
    }
    for (size_t i = 0; i < amps.size(); ++i) {
        out[2 * i] = amps[i].real();
        out[2 * i + 1] = amps[i].imag();
    }
    return QFED_OK;
}

void qfed_bound_params_default(qfed_bound_params *out) {
    if (!out) return;
    const qfed::theory::BoundParams b;
    *out = qfed_bound_params{b.nu,         b.n_outcomes, b.n_params,   b.trace_h2, b.shots,
                             b.n_clients,  b.eta,        b.lambda,     b.mu,       b.smoothness,
                             b.smoothness_p, b.grad_bound, b.local_steps, b.x_bar, b.pl_constant};
}

#define QFED_BOUND_CALL(expr)                                                                      \
    if (!p) return null_arg("params");                                                             \
    if (!out) return null_arg("out");                                                              \
    return guarded([&] {                                                                           \
        *out = (expr);                                                                             \
        return QFED_OK;                                                                            \
    })

qfed_status qfed_lemma1_variance(const qfed_bound_params *p, double *out) {
    QFED_BOUND_CALL(qfed::theory::lemma1_variance(to_bounds(*p)));
}

qfed_status qfed_lemma1_aggregate_bound(const qfed_bound_params *p, double *out) {
    QFED_BOUND_CALL(qfed::theory::lemma1_aggregate_bound(to_bounds(*p)));
}

qfed_status qfed_gap_bound(const qfed_bound_params *p, int steps, double initial_gap, double *out) {
    QFED_BOUND_CALL(qfed::theory::gap_bound(to_bounds(*p), steps, initial_gap));
}

qfed_status qfed_phi_k(const qfed_bound_params *p, double *out) {
    QFED_BOUND_CALL(qfed::theory::phi_k(to_bounds(*p)));
}

qfed_status qfed_theorem1_rate(const qfed_bound_params *p, int rounds, double initial_distance_sq,
                               double *out) {
    QFED_BOUND_CALL(qfed::theory::theorem1_rate(to_bounds(*p), rounds, initial_distance_sq));
}

qfed_status qfed_shot_noise_iterations(double delta, double mu, double smoothness, double variance,
                                       double c, long *out) {
    if (!out) return null_arg("out");
    return guarded([&] {
        *out = qfed::theory::shot_noise_iterations(delta, mu, smoothness, variance, c);
        return QFED_OK;
    });
}

} // extern "C"
