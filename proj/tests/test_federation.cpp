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
#include "error.hpp"
#include "federation.hpp"
#include "oracle.hpp"
#include "oracle_fed.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

using namespace qfed;
using std::numbers::pi;

namespace {

std::vector<ClientState> make_clients(const Dataset &data, const std::vector<double> &fractions,
                                      const ModelParams &init, std::uint64_t seed) {
    Rng rng(seed, {tag(Stream::Partition)});
    const auto shards = partition_noniid(data, fractions, rng);
    std::vector<ClientState> out;
    for (std::size_t i = 0; i < shards.size(); ++i) {
        out.push_back({static_cast<int>(i), data.subset(shards[i]), init, 0.0, 0.0});
    }
    return out;
}

TrainingSetup small_setup(Method m, std::uint64_t seed, int workers = 1) {
    TrainingSetup s;
    s.spec = QnnSpec{3, 1, 2};
    s.train.apply(m);
    s.train.shots = Shots::count(20);
    s.train.local_steps = 2;
    s.train.batch_size = 2;
    s.fed.workers = workers;
    s.noise = NoiseModel::uniform(0.01, 0.03, 0.03);
    s.initial = ModelParams::zeros(s.spec);
    s.clients = make_clients(synth_dataset(seed, 40, 2, 3), default_fractions(4), s.initial, seed);
    s.rounds = 3;
    s.seed = seed;
    return s;
}

} // namespace

TEST(SelectClients, FullFractionIsCanonical) {
    Rng rng(1);
    EXPECT_EQ(select_clients(5, 1.0, rng), (std::vector<int>{0, 1, 2, 3, 4}));
}

TEST(SelectClients, SizeAndDistinctness) {
    Rng rng(2);
    for (int t = 0; t < 50; ++t) {
        const auto s = select_clients(10, 0.3, rng);
        ASSERT_EQ(s.size(), 3u);
        ASSERT_EQ(std::set<int>(s.begin(), s.end()).size(), 3u);
        for (int id : s) ASSERT_TRUE(id >= 0 && id < 10);
    }
    EXPECT_EQ(select_clients(10, 0.01, rng).size(), 1u);
    EXPECT_THROW(select_clients(10, 0.0, rng), Error);
    EXPECT_THROW(select_clients(10, 1.5, rng), Error);
}

TEST(SelectClients, DeterministicPerSeedAndRound) {
    Rng a(7, {tag(Stream::Select), 3}), b(7, {tag(Stream::Select), 3});
    EXPECT_EQ(select_clients(20, 0.4, a), select_clients(20, 0.4, b));
}

TEST(SelectClients, RoughlyUniform) {
    std::vector<int> hits(10, 0);
    for (std::uint64_t r = 0; r < 3000; ++r) {
        Rng rng(5, {r});
        for (int id : select_clients(10, 0.3, rng)) ++hits[id];
    }
    for (int h : hits) EXPECT_NEAR(h / 3000.0, 0.3, 0.04);
}

TEST(Aggregate, Basics) {
    const ModelParams v(std::vector<double>{0.1, -2.5, 3.3});
    const std::vector<ModelParams> same(4, v);
    EXPECT_EQ(aggregate(same), v);
    const std::vector<ModelParams> two{ModelParams(std::vector<double>(3, 0.0)),
                                       ModelParams(std::vector<double>(3, 2.0))};
    EXPECT_EQ(aggregate(two).theta, std::vector<double>(3, 1.0));
    EXPECT_THROW(aggregate(std::vector<ModelParams>{}), Error);
    const std::vector<ModelParams> ragged{ModelParams(std::vector<double>(3, 0.0)),
                                          ModelParams(std::vector<double>(2, 0.0))};
    try {
        aggregate(ragged);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::Shape);
    }
}

TEST(Aggregate, MatchesMeanOracleAndIsPermutationInvariant) {
    Rng rng(3);
    std::vector<ModelParams> xs;
    std::vector<std::vector<double>> raw;
    for (int i = 0; i < 10; ++i) {
        std::vector<double> v(16);
        for (double &t : v) t = 10 * (rng.uniform() - 0.5);
        raw.push_back(v);
        xs.emplace_back(v);
    }
    const auto got = aggregate(xs);
    const auto want = oracle::elementwise_mean(raw);
    for (std::size_t d = 0; d < want.size(); ++d) EXPECT_NEAR(got[d], want[d], 1e-12);
    std::reverse(xs.begin(), xs.end());
    const auto rev = aggregate(xs);
    for (std::size_t d = 0; d < want.size(); ++d) EXPECT_NEAR(rev[d], got[d], 1e-12);
}

TEST(GlobalLoss, UniformTenClassModel) {
    const QnnSpec spec{10, 1, 10};
    Dataset d;
    d.n_features = 10;
    d.n_classes = 10;
    d.features.assign(30, 0.0);
    d.labels = {0, 4, 9};
    std::vector<ClientState> clients{{0, d, {}, 0, 0}};
    EXPECT_NEAR(global_loss(clients, spec, ModelParams::zeros(spec)), std::log(10.0), 1e-12);
}

TEST(GlobalLoss, OneConfidentSample) {
    // One qubit per class; label 0 with f = (1, -1) gives the smallest reachable loss.
    const QnnSpec spec{2, 1, 2};
    Dataset d{2, 2, {0.0, pi}, {0}};
    std::vector<ClientState> clients{{0, d, {}, 0, 0}};
    const double want = -std::log(std::exp(1.0) / (std::exp(1.0) + std::exp(-1.0)));
    EXPECT_NEAR(global_loss(clients, spec, ModelParams::zeros(spec)), want, 1e-12);
    EXPECT_DOUBLE_EQ(global_accuracy(clients, spec, ModelParams::zeros(spec)), 1.0);
}

TEST(GlobalLoss, MeanOfPerClientLossesAndEmptyShards) {
    const QnnSpec spec{3, 1, 2};
    Rng rng(4);
    ModelParams p = ModelParams::zeros(spec);
    for (double &t : p.theta) t = rng.uniform();
    const Dataset data = synth_dataset(2, 30, 2, 3);
    auto clients = make_clients(data, default_fractions(3), p, 2);
    double want = 0;
    for (const auto &c : clients) {
        double s = 0;
        for (std::size_t i = 0; i < c.shard.size(); ++i) {
            const auto row = c.shard.row(i);
            const auto f = oracle::classifier_expectations(3, 1, 2, p.theta,
                                                           std::vector<double>(row.begin(), row.end()));
            s += oracle::softmax_ce(f, c.shard.labels[i]);
        }
        want += s / c.shard.size();
    }
    want /= clients.size();
    EXPECT_NEAR(global_loss(clients, spec, p), want, 1e-12);
    clients.push_back({3, Dataset{3, 2, {}, {}}, p, 0, 0});
    EXPECT_NEAR(global_loss(clients, spec, p), want, 1e-12);
    std::vector<ClientState> empty{{0, Dataset{3, 2, {}, {}}, p, 0, 0}};
    EXPECT_THROW(global_loss(empty, spec, p), Error);
}

TEST(RunRound, SingleClientGlobalEqualsLocal) {
    auto s = small_setup(Method::Spqfl, 3);
    std::vector<ClientState> one{s.clients[0]};
    ServerState server = init_server(one, s.spec, s.initial);
    ClientState copy = one[0];
    const auto local = local_round(copy, s.initial, server.prev_global_loss, s.train, s.spec,
                                   s.noise, s.seed, 1);
    run_round(server, one, s.spec, s.train, s.fed, s.noise, s.seed);
    EXPECT_EQ(server.global, local.params);
    EXPECT_EQ(server.round, 1);
}

TEST(RunRound, ZeroGradientFixedPoint) {
    const QnnSpec spec{2, 1, 2};
    Dataset flat{2, 2, std::vector<double>(12, 0.0), {0, 1, 0, 1, 0, 1}};
    TrainConfig c;
    c.lambda = 0;
    c.shots = Shots::exact();
    std::vector<ClientState> clients{{0, flat, {}, 0, 0}, {1, flat, {}, 0, 0}};
    ServerState server = init_server(clients, spec, ModelParams::zeros(spec));
    for (int k = 0; k < 3; ++k) run_round(server, clients, spec, c, {}, NoiseModel::none(), 1);
    EXPECT_EQ(server.global, ModelParams::zeros(spec));
}

TEST(RunRound, AllSkippedIsRoundError) {
    const QnnSpec spec{2, 1, 2};
    std::vector<ClientState> clients{{0, Dataset{2, 2, {}, {}}, {}, 0, 0}};
    ServerState server;
    server.global = ModelParams::zeros(spec);
    try {
        run_round(server, clients, spec, TrainConfig{}, {}, NoiseModel::none(), 1);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::Round);
    }
}

TEST(RunRound, SubsetSelectionAveragesSelectedOnly) {
    auto s = small_setup(Method::Qfl, 5);
    s.fed.select_fraction = 0.5;
    ServerState server = init_server(s.clients, s.spec, s.initial);
    const auto r = run_round(server, s.clients, s.spec, s.train, s.fed, s.noise, s.seed);
    ASSERT_EQ(r.clients.size(), 2u);
    std::vector<ModelParams> locals;
    for (const auto &e : r.clients) {
        ClientState c = s.clients[static_cast<std::size_t>(e.client_id)];
        locals.push_back(local_round(c, s.initial, 0.0, s.train, s.spec, s.noise, s.seed, 1).params);
    }
    EXPECT_EQ(server.global, aggregate(locals));
}

TEST(RunTraining, BookkeepingAndReports) {
    auto s = small_setup(Method::Spqfl, 6);
    std::vector<RoundReport> seen;
    const auto server = run_training(s, [&](const RoundReport &r) { seen.push_back(r); });
    ASSERT_EQ(seen.size(), 3u);
    EXPECT_EQ(server.history, seen);
    for (std::size_t i = 0; i < seen.size(); ++i) {
        EXPECT_EQ(seen[i].round, static_cast<int>(i) + 1);
        EXPECT_EQ(seen[i].clients.size(), s.clients.size());
        EXPECT_EQ(seen[i].wall_ms, 0.0);
    }
    EXPECT_EQ(server.prev_global_loss, seen.back().global_loss);
}

TEST(RunTraining, PrevLossStartsFromInitialModel) {
    auto s = small_setup(Method::Pqfl, 6);
    const auto server = init_server(s.clients, s.spec, s.initial);
    EXPECT_EQ(server.prev_global_loss, global_loss(s.clients, s.spec, s.initial));
    EXPECT_GT(server.prev_global_loss, 0.0);
}

TEST(RunTraining, ZeroRoundsIsEmpty) {
    auto s = small_setup(Method::Spqfl, 6);
    s.rounds = 0;
    const auto server = run_training(s);
    EXPECT_TRUE(server.history.empty());
    EXPECT_EQ(server.global, s.initial);
}

TEST(RunTraining, DeterministicAndWorkerIndependent) {
    const auto a = run_training(small_setup(Method::Spqfl, 8, 1));
    const auto b = run_training(small_setup(Method::Spqfl, 8, 1));
    const auto c = run_training(small_setup(Method::Spqfl, 8, 4));
    EXPECT_EQ(a.history, b.history);
    EXPECT_EQ(a.global, b.global);
    EXPECT_EQ(a.history, c.history);
    EXPECT_EQ(a.global, c.global);
}

TEST(RunTraining, TogglesOffIsPlainFedAvg) {
    auto s = small_setup(Method::Qfl, 9);
    s.rounds = 4;
    std::vector<Dataset> shards;
    for (const auto &c : s.clients) shards.push_back(c.shard);
    const auto want = oracle::plain_fedavg(s.spec, s.initial.theta, shards, s.train.eta,
                                           s.train.local_steps, s.train.batch_size, s.train.shots,
                                           s.noise, s.seed, s.rounds);
    std::vector<std::vector<double>> got;
    ServerState server = init_server(s.clients, s.spec, s.initial);
    for (int k = 0; k < s.rounds; ++k) {
        run_round(server, s.clients, s.spec, s.train, s.fed, s.noise, s.seed);
        got.push_back(server.global.theta);
    }
    EXPECT_EQ(got, want);
}

TEST(RunTraining, RecalibrationHookRunsEachRound) {
    auto s = small_setup(Method::Spqfl, 10);
    std::vector<int> rounds;
    s.recalibrate = [&](int k) {
        rounds.push_back(k);
        return NoiseModel::none();
    };
    run_training(s);
    EXPECT_EQ(rounds, (std::vector<int>{1, 2, 3}));
}
