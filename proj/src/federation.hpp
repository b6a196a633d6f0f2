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
 * Server side of the federated loop: client selection, fork-join local
 * rounds, unweighted parameter averaging and global-loss bookkeeping.
 */
#pragma once

#include "client.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace qfed {

struct FederationConfig {
    double select_fraction = 1.0;
    /// Worker threads for client rounds; results never depend on this.
    int workers = 1;
    bool record_wall_time = false;

    void validate() const;
};

struct ClientEntry {
    int client_id = 0;
    double local_loss = 0.0;
    double x = 1.0;
    double xi_hat = 0.0;
    int extra_epochs = 0;
    double delta_norm = 0.0;
    bool skipped = false;

    bool operator==(const ClientEntry &) const = default;
};

struct RoundReport {
    int round = 0;
    std::vector<ClientEntry> clients;
    double global_loss = 0.0;
    double global_acc = 0.0;
    double wall_ms = 0.0;

    [[nodiscard]] double mean_x() const;
    [[nodiscard]] double mean_extra_epochs() const;
    [[nodiscard]] double mean_local_loss() const;

    bool operator==(const RoundReport &) const = default;
};

struct ServerState {
    ModelParams global;
    int round = 0;
    double prev_global_loss = 0.0;
    double prev_global_acc = 0.0;
    std::vector<RoundReport> history;
};

/// max(1, round(fraction * n_total)) distinct ids, sampled without
/// replacement and returned sorted. fraction = 1 returns 0..n-1.
std::vector<int> select_clients(int n_total, double fraction, Rng &rng);

/// Coordinate-wise mean.
ModelParams aggregate(std::span<const ModelParams> params);

/// (1/N) sum_n mean CE over client n's shard, exact mode. Empty shards are
/// left out of the mean.
double global_loss(std::span<const ClientState> clients, const QnnSpec &spec,
                   const ModelParams &params);

/// Mean over non-empty clients of shard accuracy.
double global_accuracy(std::span<const ClientState> clients, const QnnSpec &spec,
                       const ModelParams &params);

/// Builds the server state with prev_global_loss evaluated at `initial`.
ServerState init_server(std::span<const ClientState> clients, const QnnSpec &spec,
                        ModelParams initial);

/// select -> broadcast -> local_round on every selected client (fork-join) ->
/// aggregate -> evaluate. Increments server.round and appends to history.
RoundReport run_round(ServerState &server, std::vector<ClientState> &clients,
                      const QnnSpec &spec, const TrainConfig &train,
                      const FederationConfig &fed, const NoiseModel &noise,
                      std::uint64_t root_seed);

struct TrainingSetup {
    QnnSpec spec;
    TrainConfig train;
    FederationConfig fed;
    NoiseModel noise;
    std::vector<ClientState> clients;
    ModelParams initial;
    int rounds = 0;
    std::uint64_t seed = 0;
    /// Called at the start of every round when set; returns the model to use.
    std::function<NoiseModel(int round)> recalibrate;
};

/// Runs `rounds` rounds, calling `on_round` after each one. Returns the final
/// server state.
ServerState run_training(TrainingSetup setup,
                         const std::function<void(const RoundReport &)> &on_round = {});

} // namespace qfed
