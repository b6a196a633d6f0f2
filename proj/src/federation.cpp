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
#include "federation.hpp"

#include "error.hpp"
#include "rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>
#include <thread>

namespace qfed {

void FederationConfig::validate() const {
    if (!(select_fraction > 0.0 && select_fraction <= 1.0)) {
        fail(ErrorCode::Config, "federation.select_fraction must be in (0, 1]");
    }
    if (workers < 1) {
        fail(ErrorCode::Config, "federation.workers must be >= 1");
    }
}

double RoundReport::mean_x() const {
    double s = 0.0;
    int n = 0;
    for (const auto &c : clients) {
        if (!c.skipped) {
            s += c.x;
            ++n;
        }
    }
    return n ? s / n : 0.0;
}

double RoundReport::mean_extra_epochs() const {
    double s = 0.0;
    int n = 0;
    for (const auto &c : clients) {
        if (!c.skipped) {
            s += c.extra_epochs;
            ++n;
        }
    }
    return n ? s / n : 0.0;
}

double RoundReport::mean_local_loss() const {
    double s = 0.0;
    int n = 0;
    for (const auto &c : clients) {
        if (!c.skipped) {
            s += c.local_loss;
            ++n;
        }
    }
    return n ? s / n : 0.0;
}

std::vector<int> select_clients(int n_total, double fraction, Rng &rng) {
    if (n_total < 1) {
        fail(ErrorCode::Config, "no clients to select from");
    }
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        fail(ErrorCode::Config, "selection fraction must be in (0, 1]");
    }
    std::vector<int> ids(static_cast<std::size_t>(n_total));
    std::iota(ids.begin(), ids.end(), 0);
    if (fraction == 1.0) {
        return ids;
    }
    const auto k = static_cast<std::size_t>(
        std::max(1L, std::lround(fraction * static_cast<double>(n_total))));
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.below(ids.size() - i);
        std::swap(ids[i], ids[j]);
    }
    ids.resize(k);
    std::sort(ids.begin(), ids.end());
    return ids;
}

ModelParams aggregate(std::span<const ModelParams> params) {
    if (params.empty()) {
        fail(ErrorCode::Aggregation, "cannot aggregate an empty list of models");
    }
    const std::size_t P = params.front().size();
    ModelParams out(std::vector<double>(P, 0.0));
    for (const auto &p : params) {
        if (p.size() != P) {
            fail(ErrorCode::Shape, "aggregated models have different lengths");
        }
        for (std::size_t d = 0; d < P; ++d) {
            out[d] += p[d];
        }
    }
    const auto n = static_cast<double>(params.size());
    for (double &v : out.theta) {
        v /= n;
    }
    return out;
}

double global_loss(std::span<const ClientState> clients, const QnnSpec &spec,
                   const ModelParams &params) {
    double s = 0.0;
    int n = 0;
    for (const auto &c : clients) {
        if (c.shard.empty()) {
            continue;
        }
        s += mean_loss(spec, params, c.shard);
        ++n;
    }
    if (n == 0) {
        fail(ErrorCode::Round, "every client shard is empty");
    }
    return s / n;
}

double global_accuracy(std::span<const ClientState> clients, const QnnSpec &spec,
                       const ModelParams &params) {
    double s = 0.0;
    int n = 0;
    for (const auto &c : clients) {
        if (c.shard.empty()) {
            continue;
        }
        s += accuracy(spec, params, c.shard);
        ++n;
    }
    return n ? s / n : 0.0;
}

ServerState init_server(std::span<const ClientState> clients, const QnnSpec &spec,
                        ModelParams initial) {
    check_params(spec, initial);
    ServerState s;
    s.prev_global_loss = global_loss(clients, spec, initial);
    s.prev_global_acc = global_accuracy(clients, spec, initial);
    s.global = std::move(initial);
    return s;
}

RoundReport run_round(ServerState &server, std::vector<ClientState> &clients,
                      const QnnSpec &spec, const TrainConfig &train,
                      const FederationConfig &fed, const NoiseModel &noise,
                      std::uint64_t root_seed) {
    if (clients.empty()) {
        fail(ErrorCode::Round, "run_round needs at least one client");
    }
    const auto t0 = std::chrono::steady_clock::now();
    const int k = server.round + 1;
    Rng select_rng(root_seed, {tag(Stream::Select), static_cast<std::uint64_t>(k)});
    const auto selected =
        select_clients(static_cast<int>(clients.size()), fed.select_fraction, select_rng);

    std::vector<LocalReport> reports(selected.size());
    std::vector<std::exception_ptr> errors(selected.size());
    const ModelParams &global = server.global;
    auto work = [&](std::size_t i) {
        try {
            reports[i] = local_round(clients[static_cast<std::size_t>(selected[i])], global,
                                     server.prev_global_loss, train, spec, noise, root_seed, k);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };

    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(fed.workers), selected.size());
    if (n_workers <= 1) {
        for (std::size_t i = 0; i < selected.size(); ++i) {
            work(i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < selected.size();) {
                    work(i);
                }
            });
        }
        for (auto &t : pool) {
            t.join();
        }
    }
    for (const auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    RoundReport report;
    report.round = k;
    std::vector<ModelParams> returned;
    for (const auto &r : reports) {
        report.clients.push_back({r.client_id, r.local_loss, r.x, r.xi_hat, r.extra_epochs,
                                  r.delta_norm, r.skipped});
        if (!r.skipped) {
            returned.push_back(r.params);
        }
    }
    if (returned.empty()) {
        fail(ErrorCode::Round, "round " + std::to_string(k) + ": every selected client skipped");
    }
    server.global = aggregate(returned);
    report.global_loss = global_loss(clients, spec, server.global);
    report.global_acc = global_accuracy(clients, spec, server.global);
    if (fed.record_wall_time) {
        report.wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
    }
    server.prev_global_loss = report.global_loss;
    server.prev_global_acc = report.global_acc;
    server.round = k;
    server.history.push_back(report);
    return report;
}

ServerState run_training(TrainingSetup setup,
                         const std::function<void(const RoundReport &)> &on_round) {
    setup.spec.validate();
    setup.train.validate();
    setup.fed.validate();
    ServerState server = init_server(setup.clients, setup.spec, setup.initial);
    for (int r = 0; r < setup.rounds; ++r) {
        if (setup.recalibrate) {
            setup.noise = setup.recalibrate(server.round + 1);
        }
        const RoundReport report = run_round(server, setup.clients, setup.spec, setup.train,
                                             setup.fed, setup.noise, setup.seed);
        if (on_round) {
            on_round(report);
        }
    }
    return server;
}

} // namespace qfed
