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
#include "client.hpp"

#include "error.hpp"
#include "rng.hpp"
#include "theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace qfed {

const char *to_string(Method m) {
    switch (m) {
    case Method::Qfl: return "qfl";
    case Method::Pqfl: return "pqfl";
    case Method::Spqfl: return "spqfl";
    }
    return "?";
}

Method parse_method(std::string_view text) {
    if (text == "qfl") return Method::Qfl;
    if (text == "pqfl") return Method::Pqfl;
    if (text == "spqfl") return Method::Spqfl;
    fail(ErrorCode::Usage, "unknown method '" + std::string(text) + "' (qfl, pqfl, spqfl)");
}

void TrainConfig::validate() const {
    auto require = [](bool ok, const char *what) {
        if (!ok) fail(ErrorCode::Config, what);
    };
    require(eta > 0 && std::isfinite(eta), "train.eta must be > 0");
    require(lambda >= 0 && std::isfinite(lambda), "train.lambda must be >= 0");
    require(gamma >= 0 && std::isfinite(gamma), "train.gamma must be >= 0");
    require(local_steps >= 1, "train.local_steps must be >= 1");
    require(extra_epochs_max >= 0, "train.extra_epochs_max must be >= 0");
    require(extra_epochs_gain > 0, "train.extra_epochs_gain must be > 0");
    require(noise_repeats >= 2, "train.noise_repeats must be >= 2");
    require(batch_size >= 1, "train.batch_size must be >= 1");
    require(nu > 0 && trace_h2 > 0 && n_outcomes > 0, "analytic noise constants must be > 0");
}

void TrainConfig::apply(Method m) {
    sporadic = m == Method::Spqfl;
    personalization = m != Method::Qfl;
}

double estimate_noise(const QnnSpec &spec, const ModelParams &params, SampleRef probe,
                      const TrainConfig &config, const NoiseModel &noise, Rng &rng) {
    if (config.noise_estimate == NoiseEstimate::Analytic) {
        if (config.shots.is_exact()) {
            return 0.0;
        }
        theory::BoundParams bp;
        bp.nu = config.nu;
        bp.n_outcomes = config.n_outcomes;
        bp.n_params = spec.n_params();
        bp.trace_h2 = config.trace_h2;
        bp.shots = config.shots.value();
        return std::sqrt(theory::lemma1_variance(bp));
    }
    if (config.noise_repeats < 2) {
        fail(ErrorCode::Config, "empirical noise estimation needs noise_repeats >= 2");
    }
    if (config.shots.is_exact()) {
        return 0.0;
    }
    const auto K = static_cast<std::size_t>(spec.n_classes);
    const int R = config.noise_repeats;
    std::vector<double> sum(K, 0.0), sum_sq(K, 0.0);
    for (int r = 0; r < R; ++r) {
        const Prediction p =
            forward_shots(spec, params, probe.features, config.shots.value(), noise, rng);
        for (std::size_t k = 0; k < K; ++k) {
            sum[k] += p.expectations[k];
            sum_sq[k] += p.expectations[k] * p.expectations[k];
        }
    }
    double xi = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const double var = (sum_sq[k] - sum[k] * sum[k] / R) / (R - 1);
        xi += std::sqrt(std::max(var, 0.0));
    }
    return xi / static_cast<double>(K);
}

double sporadic_weight(double xi_hat, double gamma) {
    if (!(xi_hat >= 0.0) || !(gamma >= 0.0)) {
        fail(ErrorCode::Domain, "sporadic weight needs xi_hat >= 0 and gamma >= 0");
    }
    return std::exp(-gamma * xi_hat);
}

ModelParams apply_update(const ModelParams &w, const ModelParams &global,
                         std::span<const double> grad, double x, const TrainConfig &config) {
    if (grad.size() != w.size() || global.size() != w.size()) {
        fail(ErrorCode::Shape, "update operands have different lengths");
    }
    ModelParams out = w;
    for (std::size_t d = 0; d < w.size(); ++d) {
        const double prox = config.personalization ? config.lambda * (w[d] - global[d]) : 0.0;
        out[d] = w[d] - config.eta * (grad[d] * x + prox);
    }
    return out;
}

std::vector<double> batch_gradient(const QnnSpec &spec, const ModelParams &params,
                                   const Dataset &shard, std::span<const std::size_t> batch,
                                   Shots shots, const NoiseModel &noise,
                                   std::uint64_t step_seed) {
    std::vector<double> g(params.size(), 0.0);
    if (batch.empty()) {
        return g;
    }
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto gb = param_shift_grad(spec, params, shard.sample(batch[b]), shots, noise,
                                         derive_seed(step_seed, {b}));
        for (std::size_t d = 0; d < g.size(); ++d) {
            g[d] += gb[d];
        }
    }
    for (double &v : g) {
        v /= static_cast<double>(batch.size());
    }
    return g;
}

ClientState local_step(const ClientState &state, const ModelParams &global,
                       const TrainConfig &config, const QnnSpec &spec,
                       std::span<const std::size_t> batch, const NoiseModel &noise,
                       std::uint64_t seed) {
    check_params(spec, state.params);
    check_params(spec, global);
    const auto g =
        batch_gradient(spec, state.params, state.shard, batch, config.shots, noise, seed);
    const double x = config.sporadic ? sporadic_weight(state.xi_hat, config.gamma) : 1.0;
    ClientState next = state;
    next.params = apply_update(state.params, global, g, x, config);
    return next;
}

int extra_epoch_count(double local_loss, double prev_global_loss, double beta, int max_epochs) {
    if (!(prev_global_loss > 0.0) || local_loss <= prev_global_loss) {
        return 0;
    }
    const double raw = beta * (local_loss - prev_global_loss) / prev_global_loss;
    // Tolerance keeps e.g. 2 * (0.9 - 0.6) / 0.6 from rounding up to 2.
    const double wanted = std::ceil(raw - 1e-9);
    return static_cast<int>(std::min<double>(wanted, max_epochs));
}

double mean_loss(const QnnSpec &spec, const ModelParams &params, const Dataset &data) {
    if (data.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        s += loss_ce(forward_exact(spec, params, data.row(i)), data.labels[i]);
    }
    return s / static_cast<double>(data.size());
}

double accuracy(const QnnSpec &spec, const ModelParams &params, const Dataset &data) {
    if (data.empty()) {
        return 0.0;
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        hits += forward_exact(spec, params, data.row(i)).predicted_class() == data.labels[i];
    }
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

std::vector<std::size_t> round_order(std::size_t shard_size, std::uint64_t root_seed, int round,
                                     int client_id) {
    std::vector<std::size_t> order(shard_size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(root_seed, {tag(Stream::Shuffle), static_cast<std::uint64_t>(round),
                        static_cast<std::uint64_t>(client_id)});
    std::shuffle(order.begin(), order.end(), rng.engine());
    return order;
}

std::uint64_t step_seed(std::uint64_t root_seed, int round, int client_id, int step) {
    return derive_seed(root_seed, {tag(Stream::Gradient), static_cast<std::uint64_t>(round),
                                   static_cast<std::uint64_t>(client_id),
                                   static_cast<std::uint64_t>(step)});
}

std::uint64_t probe_seed(std::uint64_t root_seed, int round, int client_id) {
    return derive_seed(root_seed, {tag(Stream::Probe), static_cast<std::uint64_t>(round),
                                   static_cast<std::uint64_t>(client_id)});
}

std::vector<std::size_t> batch_at(std::span<const std::size_t> order, int batch_size, int step) {
    std::vector<std::size_t> batch;
    if (order.empty()) {
        return batch;
    }
    const std::size_t n = order.size();
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(batch_size), n);
    const std::size_t start = (static_cast<std::size_t>(step) * take) % n;
    for (std::size_t i = 0; i < take; ++i) {
        batch.push_back(order[(start + i) % n]);
    }
    return batch;
}

namespace {

double distance(const ModelParams &a, const ModelParams &b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return std::sqrt(s);
}

} // namespace

LocalReport local_round(ClientState &state, const ModelParams &global, double prev_global_loss,
                        const TrainConfig &config, const QnnSpec &spec, const NoiseModel &noise,
                        std::uint64_t root_seed, int round) {
    check_params(spec, global);
    LocalReport report;
    report.client_id = state.id;
    state.params = global;
    if (state.shard.empty()) {
        report.params = global;
        report.skipped = true;
        return report;
    }

    const auto order = round_order(state.shard.size(), root_seed, round, state.id);
    if (config.sporadic) {
        Rng rng(probe_seed(root_seed, round, state.id));
        state.xi_hat =
            estimate_noise(spec, global, state.shard.sample(order.front()), config, noise, rng);
    }
    report.xi_hat = state.xi_hat;
    report.x = config.sporadic ? sporadic_weight(state.xi_hat, config.gamma) : 1.0;

    int step = 0;
    auto run_steps = [&](int count) {
        for (int i = 0; i < count; ++i, ++step) {
            const auto batch = batch_at(order, config.batch_size, step);
            state = local_step(state, global, config, spec, batch, noise,
                               step_seed(root_seed, round, state.id, step));
        }
    };

    run_steps(config.local_steps);
    double loss = mean_loss(spec, state.params, state.shard);
    report.loss_before_extra = loss;
    if (config.personalization) {
        report.extra_epochs = extra_epoch_count(loss, prev_global_loss, config.extra_epochs_gain,
                                                config.extra_epochs_max);
        if (report.extra_epochs > 0) {
            run_steps(report.extra_epochs * config.local_steps);
            loss = mean_loss(spec, state.params, state.shard);
        }
    }
    state.last_local_loss = loss;
    report.local_loss = loss;
    report.steps = step;
    report.params = state.params;
    report.delta_norm = distance(state.params, global);
    return report;
}

} // namespace qfed
