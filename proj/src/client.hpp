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
/**
 * @file
 * Local training on one federated device: noise estimation, the sporadic
 * weight x = exp(-gamma * xi), proximal personalization and the
 * conditional extra-epoch rule.
 *
 * One local step is
 *
 *     w <- w - eta * (x * g + lambda * (w - w_global))
 *
 * where g is the mean parameter-shift gradient over a mini-batch. With both
 * toggles off it is plain SGD.
 */
#pragma once

#include "data.hpp"
#include "noise.hpp"
#include "qnn.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace qfed {

enum class NoiseEstimate { Empirical, Analytic };

enum class Method { Qfl, Pqfl, Spqfl };

const char *to_string(Method m);
Method parse_method(std::string_view text);

struct TrainConfig {
    double eta = 0.1;
    double lambda = 0.1;
    double gamma = 1.0;
    int local_steps = 10;     ///< T
    int extra_epochs_max = 3; ///< E_max
    double extra_epochs_gain = 2.0; ///< beta
    Shots shots = Shots::count(100);
    int noise_repeats = 5; ///< R
    int batch_size = 4;
    bool sporadic = true;
    bool personalization = true;
    NoiseEstimate noise_estimate = NoiseEstimate::Empirical;
    // Constants for the analytic noise estimate.
    double nu = 1.0;
    double trace_h2 = 2.0;
    double n_outcomes = 2.0;

    void validate() const;
    /// qfl: both toggles off; pqfl: personalization only; spqfl: both on.
    void apply(Method m);
};

struct ClientState {
    int id = 0;
    Dataset shard;
    ModelParams params;
    double xi_hat = 0.0;
    double last_local_loss = 0.0;
};

/// Scalar noise magnitude of the model's outputs. Empirical mode evaluates
/// forward_shots R times on `probe` and averages the per-class sample
/// standard deviations; analytic mode returns sqrt(lemma1_variance).
double estimate_noise(const QnnSpec &spec, const ModelParams &params, SampleRef probe,
                      const TrainConfig &config, const NoiseModel &noise, Rng &rng);

/// exp(-gamma * xi_hat).
double sporadic_weight(double xi_hat, double gamma);

/// The update rule with a precomputed gradient; exposed for the oracles.
ModelParams apply_update(const ModelParams &w, const ModelParams &global,
                         std::span<const double> grad, double x, const TrainConfig &config);

/// Mean param_shift_grad over the batch; sample b draws from
/// derive_seed(step_seed, {b}).
std::vector<double> batch_gradient(const QnnSpec &spec, const ModelParams &params,
                                   const Dataset &shard, std::span<const std::size_t> batch,
                                   Shots shots, const NoiseModel &noise,
                                   std::uint64_t step_seed);

ClientState local_step(const ClientState &state, const ModelParams &global,
                       const TrainConfig &config, const QnnSpec &spec,
                       std::span<const std::size_t> batch, const NoiseModel &noise,
                       std::uint64_t step_seed);

/// 0 when f_n <= F_prev or F_prev <= 0, else min(ceil(beta (f_n - F_prev) / F_prev), E_max).
int extra_epoch_count(double local_loss, double prev_global_loss, double beta, int max_epochs);

/// Mean exact-mode cross-entropy over a dataset.
double mean_loss(const QnnSpec &spec, const ModelParams &params, const Dataset &data);
double accuracy(const QnnSpec &spec, const ModelParams &params, const Dataset &data);

// Substream layout of one client round. Public so reference implementations
// in tests can replay the exact same randomness.
std::vector<std::size_t> round_order(std::size_t shard_size, std::uint64_t root_seed,
                                     int round, int client_id);
std::uint64_t step_seed(std::uint64_t root_seed, int round, int client_id, int step);
std::uint64_t probe_seed(std::uint64_t root_seed, int round, int client_id);

/// Batch `step` of a round: the next batch_size entries of `order`, wrapping.
std::vector<std::size_t> batch_at(std::span<const std::size_t> order, int batch_size, int step);

struct LocalReport {
    int client_id = 0;
    ModelParams params;
    double xi_hat = 0.0;
    double x = 1.0;
    double local_loss = 0.0;
    double loss_before_extra = 0.0;
    int extra_epochs = 0;
    int steps = 0;
    double delta_norm = 0.0;
    bool skipped = false;

    bool operator==(const LocalReport &) const = default;
};

/// One round on one device: start from `global`, refresh xi_hat, run T
/// steps, then (personalization only) run extra T-step passes when the local
/// loss exceeds the previous global loss.
LocalReport local_round(ClientState &state, const ModelParams &global, double prev_global_loss,
                        const TrainConfig &config, const QnnSpec &spec, const NoiseModel &noise,
                        std::uint64_t root_seed, int round);

} // namespace qfed
