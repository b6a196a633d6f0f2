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
#include "experiment.hpp"

#include "error.hpp"
#include "theory.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

namespace qfed {

namespace {

namespace fs = std::filesystem;

std::string num(double v, int prec = 12) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

void note(const ProgressFn &progress, const std::string &msg) {
    if (progress) progress(msg);
}

void ensure_dir(const fs::path &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        fail(ErrorCode::Io, "cannot create output directory " + dir.string() + ": " + ec.message());
    }
}

std::ofstream open_out(const fs::path &path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail(ErrorCode::Io, "cannot write " + path.string());
    }
    return out;
}

void write_file(const fs::path &path, const std::string &text) {
    auto out = open_out(path);
    out << text;
    if (!out) {
        fail(ErrorCode::Io, "write failed for " + path.string());
    }
}

std::vector<RoundReport> train_reports(const ExperimentConfig &config,
                                       const std::function<void(const RoundReport &)> &sink,
                                       ModelParams *final_params = nullptr) {
    ServerState server = run_training(make_training_setup(config), sink);
    if (final_params) *final_params = server.global;
    return server.history;
}

std::string pad(const std::string &s, std::size_t width) {
    return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

} // namespace

std::string csv_field(const std::string &text) {
    if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

NoiseModel default_calibration() { return NoiseModel::uniform(0.005, 0.02, 0.03); }

Dataset load_experiment_data(const ExperimentConfig &config) {
    const int d = config.qnn.n_qubits;
    Dataset data;
    switch (config.source) {
    case DataSource::Synth:
        return synth_dataset(config.seed, config.synth_samples, config.qnn.n_classes, d,
                             config.synth_jitter);
    case DataSource::Csv: data = load_csv(config.csv_path, config.declared_classes); break;
    case DataSource::Idx: data = load_idx(config.idx_images, config.idx_labels); break;
    }
    if (config.limit > 0 && data.size() > config.limit) {
        std::vector<std::size_t> head(config.limit);
        for (std::size_t i = 0; i < head.size(); ++i) head[i] = i;
        data = data.subset(head);
    }
    if (data.n_classes > config.qnn.n_classes) {
        fail(ErrorCode::Config, "dataset has " + std::to_string(data.n_classes) +
                                    " classes but qnn.n_classes is " +
                                    std::to_string(config.qnn.n_classes));
    }
    if (data.n_features != d) data = reduce_features(data, d);
    data.features = normalize_to_angles(data.features);
    data.n_classes = config.qnn.n_classes;
    data.validate();
    return data;
}

NoiseModel load_experiment_noise(const ExperimentConfig &config) {
    NoiseModel base;
    if (config.calibration.empty()) {
        base = default_calibration();
    } else if (config.calibration == "none") {
        base = NoiseModel::none();
    } else {
        base = load_calibration(config.calibration);
    }
    return scale_regime(base, config.regime);
}

ModelParams initial_params(const ExperimentConfig &config) {
    ModelParams p = ModelParams::zeros(config.qnn);
    if (config.init == InitMode::Uniform) {
        Rng rng(config.seed, {tag(Stream::Init)});
        for (double &t : p.theta) t = config.init_scale * (2.0 * rng.uniform() - 1.0);
    }
    return p;
}

TrainingSetup make_training_setup(const ExperimentConfig &config) {
    config.validate();
    TrainingSetup s;
    s.spec = config.qnn;
    s.train = config.train;
    s.fed = config.fed;
    s.fed.record_wall_time = config.record_wall_time;
    s.noise = load_experiment_noise(config);
    s.rounds = config.rounds;
    s.seed = config.seed;
    s.initial = initial_params(config);

    const Dataset data = load_experiment_data(config);
    Rng part(config.seed, {tag(Stream::Partition)});
    const auto shards = partition_noniid(data, config.fractions, part);
    for (std::size_t n = 0; n < shards.size(); ++n) {
        ClientState c;
        c.id = static_cast<int>(n);
        c.shard = data.subset(shards[n]);
        c.shard.n_classes = data.n_classes;
        c.shard.n_features = data.n_features;
        c.params = s.initial;
        s.clients.push_back(std::move(c));
    }
    if (config.recalibrate && !config.calibration.empty() && config.calibration != "none") {
        const std::string path = config.calibration;
        const Regime regime = config.regime;
        s.recalibrate = [path, regime](int) { return scale_regime(load_calibration(path), regime); };
    }
    return s;
}

std::string metrics_header() {
    return "round,global_loss,global_acc,mean_x,mean_extra_epochs,mean_local_loss,wall_ms\n";
}

std::string metrics_row(const RoundReport &r) {
    std::ostringstream out;
    out << r.round << ',' << num(r.global_loss) << ',' << num(r.global_acc) << ','
        << num(r.mean_x()) << ',' << num(r.mean_extra_epochs()) << ',' << num(r.mean_local_loss())
        << ',' << num(r.wall_ms, 6) << '\n';
    return out.str();
}

std::uint64_t spec_hash(const QnnSpec &spec) {
    const std::string key = "ry-rz-czchain/q" + std::to_string(spec.n_qubits) + "/l" +
                            std::to_string(spec.n_layers) + "/c" +
                            std::to_string(spec.n_classes);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : key) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string format_model(const QnnSpec &spec, const ModelParams &params) {
    char head[96];
    std::snprintf(head, sizeof head, "spec_hash %016" PRIx64 "\nn_params %zu\n", spec_hash(spec),
                  params.theta.size());
    std::string out = head;
    for (double t : params.theta) out += num(t, 17) + "\n";
    return out;
}

ModelParams parse_model(const std::string &text, const QnnSpec &spec) {
    std::istringstream in(text);
    std::string word;
    std::string hash_hex;
    std::size_t count = 0;
    if (!(in >> word >> hash_hex) || word != "spec_hash") {
        fail(ErrorCode::DataFormat, "model file: missing spec_hash header");
    }
    if (!(in >> word >> count) || word != "n_params") {
        fail(ErrorCode::DataFormat, "model file: missing n_params header");
    }
    if (std::stoull(hash_hex, nullptr, 16) != spec_hash(spec)) {
        fail(ErrorCode::Shape, "model file was written for a different QNN shape");
    }
    ModelParams p;
    double t = 0.0;
    while (in >> t) p.theta.push_back(t);
    if (p.theta.size() != count) {
        fail(ErrorCode::DataFormat, "model file: expected " + std::to_string(count) +
                                        " parameters, found " + std::to_string(p.theta.size()));
    }
    check_params(spec, p);
    return p;
}

TrainResult cmd_train(const ExperimentConfig &config, const fs::path &out_dir,
                      const ProgressFn &progress) {
    TrainingSetup setup = make_training_setup(config);
    ensure_dir(out_dir);
    write_file(out_dir / "resolved.cfg", render_config(config));

    auto metrics = open_out(out_dir / "metrics.csv");
    metrics << metrics_header() << std::flush;
    TrainResult result;
    const QnnSpec spec = setup.spec;
    ServerState server = run_training(std::move(setup), [&](const RoundReport &r) {
        metrics << metrics_row(r) << std::flush;
        result.reports.push_back(r);
        note(progress, "round " + std::to_string(r.round) + " loss " + num(r.global_loss, 6) +
                           " acc " + num(r.global_acc, 4));
    });
    result.final_params = server.global;
    write_file(out_dir / "final_model.txt", format_model(spec, result.final_params));
    return result;
}

CompareResult cmd_compare(const ExperimentConfig &config, const std::vector<Method> &methods,
                          const fs::path &out_dir, const ProgressFn &progress) {
    if (methods.size() < 2) {
        fail(ErrorCode::Usage, "compare needs at least two methods");
    }
    std::set<Method> unique(methods.begin(), methods.end());
    if (unique.size() != methods.size()) {
        fail(ErrorCode::Usage, "compare: duplicate method");
    }
    config.validate();
    // Fail on a bad dataset or calibration before writing anything.
    (void)make_training_setup(config);
    ensure_dir(out_dir);
    write_file(out_dir / "resolved.cfg", render_config(config));

    CompareResult result;
    result.baseline = unique.count(Method::Qfl) ? Method::Qfl : methods.front();
    for (Method m : methods) {
        MethodSummary ms;
        ms.method = m;
        for (int s = 0; s < config.compare_seeds; ++s) {
            ExperimentConfig run = config;
            run.seed = config.seed + static_cast<std::uint64_t>(s);
            run.train.apply(m);
            const std::string name =
                std::string("metrics_") + to_string(m) + "_seed" + std::to_string(run.seed) + ".csv";
            auto out = open_out(out_dir / name);
            out << metrics_header();
            const auto reports = train_reports(run, [&](const RoundReport &r) {
                out << metrics_row(r) << std::flush;
            });
            RunSummary rs;
            rs.method = m;
            rs.seed = run.seed;
            rs.rounds_to_threshold = config.rounds + 1;
            if (!reports.empty()) {
                rs.final_loss = reports.back().global_loss;
                rs.final_acc = reports.back().global_acc;
            } else {
                const auto setup = make_training_setup(run);
                rs.final_loss = global_loss(setup.clients, setup.spec, setup.initial);
                rs.final_acc = global_accuracy(setup.clients, setup.spec, setup.initial);
            }
            for (const auto &r : reports) {
                if (r.global_acc >= config.acc_threshold) {
                    rs.rounds_to_threshold = r.round;
                    break;
                }
            }
            note(progress, std::string(to_string(m)) + " seed " + std::to_string(run.seed) +
                               ": loss " + num(rs.final_loss, 6) + " acc " + num(rs.final_acc, 4));
            ms.mean_final_loss += rs.final_loss;
            ms.mean_final_acc += rs.final_acc;
            ms.mean_rounds_to_threshold += rs.rounds_to_threshold;
            result.runs.push_back(rs);
        }
        const double k = config.compare_seeds;
        ms.mean_final_loss /= k;
        ms.mean_final_acc /= k;
        ms.mean_rounds_to_threshold /= k;
        result.methods.push_back(ms);
    }
    double base_acc = 0.0;
    for (const auto &ms : result.methods) {
        if (ms.method == result.baseline) base_acc = ms.mean_final_acc;
    }
    for (auto &ms : result.methods) ms.delta_acc = ms.mean_final_acc - base_acc;

    const std::string delta_col = std::string("delta_acc_vs_") + to_string(result.baseline);
    std::ostringstream runs_csv;
    runs_csv << "method,seed,final_loss,final_acc,rounds_to_threshold\n";
    for (const auto &r : result.runs) {
        runs_csv << to_string(r.method) << ',' << r.seed << ',' << num(r.final_loss) << ','
                 << num(r.final_acc) << ',' << r.rounds_to_threshold << '\n';
    }
    write_file(out_dir / "runs.csv", runs_csv.str());

    std::ostringstream summary;
    std::ostringstream table;
    summary << "method,seeds,mean_final_loss,mean_final_acc,mean_rounds_to_threshold," << delta_col
            << '\n';
    table << pad("method", 8) << pad("final_loss", 14) << pad("final_acc", 12)
          << pad("rounds_to_" + num(config.acc_threshold, 4), 18) << delta_col << '\n';
    for (const auto &ms : result.methods) {
        char delta[32];
        std::snprintf(delta, sizeof delta, "%+.4f", ms.delta_acc);
        summary << to_string(ms.method) << ',' << config.compare_seeds << ','
                << num(ms.mean_final_loss) << ',' << num(ms.mean_final_acc) << ','
                << num(ms.mean_rounds_to_threshold) << ',' << delta << '\n';
        table << pad(to_string(ms.method), 8) << pad(num(ms.mean_final_loss, 6), 14)
              << pad(num(ms.mean_final_acc, 4), 12) << pad(num(ms.mean_rounds_to_threshold, 4), 18)
              << delta << '\n';
    }
    write_file(out_dir / "summary.csv", summary.str());
    result.table = table.str();
    return result;
}

SweepResult cmd_sweep_shots(const ExperimentConfig &config, std::vector<int> shots,
                            const fs::path &out_dir, const ProgressFn &progress) {
    if (shots.empty()) {
        fail(ErrorCode::Usage, "sweep-shots needs at least one shot count");
    }
    for (int m : shots) {
        if (m < 1) fail(ErrorCode::Usage, "shot counts must be >= 1");
    }
    std::sort(shots.begin(), shots.end());
    if (std::adjacent_find(shots.begin(), shots.end()) != shots.end()) {
        fail(ErrorCode::Usage, "duplicate shot count in sweep list");
    }
    (void)make_training_setup(config);
    ensure_dir(out_dir);
    write_file(out_dir / "resolved.cfg", render_config(config));

    SweepResult result;
    for (int m : shots) {
        ExperimentConfig run = config;
        run.train.shots = Shots::count(m);
        SweepRow row;
        row.shots = m;
        auto out = open_out(out_dir / ("loss_M" + std::to_string(m) + ".csv"));
        out << "round,global_loss,global_acc\n";
        const auto reports = train_reports(run, [&](const RoundReport &r) {
            out << r.round << ',' << num(r.global_loss) << ',' << num(r.global_acc) << '\n'
                << std::flush;
        });
        for (const auto &r : reports) row.losses.push_back(r.global_loss);
        if (!reports.empty()) {
            row.final_loss = reports.back().global_loss;
            row.final_acc = reports.back().global_acc;
        } else {
            const auto setup = make_training_setup(run);
            row.final_loss = global_loss(setup.clients, setup.spec, setup.initial);
            row.final_acc = global_accuracy(setup.clients, setup.spec, setup.initial);
        }
        note(progress, "M=" + std::to_string(m) + ": loss " + num(row.final_loss, 6));
        result.rows.push_back(std::move(row));
    }
    std::ostringstream csv;
    std::ostringstream table;
    csv << "shots,final_loss,final_acc\n";
    table << pad("shots", 8) << pad("final_loss", 14) << "final_acc\n";
    for (const auto &row : result.rows) {
        csv << row.shots << ',' << num(row.final_loss) << ',' << num(row.final_acc) << '\n';
        table << pad(std::to_string(row.shots), 8) << pad(num(row.final_loss, 6), 14)
              << num(row.final_acc, 4) << '\n';
    }
    write_file(out_dir / "shots_summary.csv", csv.str());
    result.table = table.str();
    return result;
}

VerifyResult cmd_verify_bounds(const ExperimentConfig &config, const fs::path &out_dir,
                               const ProgressFn &progress) {
    config.validate();
    const QnnSpec spec = config.qnn;
    const int n_params = spec.n_params();
    std::vector<int> grid = config.verify_shots;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    theory::BoundParams bp;
    bp.nu = config.train.nu;
    bp.n_outcomes = config.train.n_outcomes;
    bp.trace_h2 = config.train.trace_h2;
    bp.n_params = n_params;
    bp.n_clients = config.n_clients;
    bp.eta = config.train.eta;
    bp.lambda = config.train.lambda;
    bp.local_steps = config.train.local_steps;

    auto bound_at = [&](int m) {
        theory::BoundParams p = bp;
        p.shots = m;
        return theory::lemma1_variance(p);
    };

    VerifyResult result;
    auto add = [&](std::string quantity, double empirical, std::string bound, bool ok,
                   bool info = false) {
        result.checks.push_back({std::move(quantity), empirical, std::move(bound),
                                 info ? "info" : (ok ? "pass" : "FAIL")});
        if (!info && !ok) result.all_pass = false;
    };

    // Shot noise only: the bound is stated for ideal gates and readout.
    const NoiseModel ideal = NoiseModel::none();
    double max_grad_norm = 0.0;
    for (int c = 0; c < config.verify_circuits; ++c) {
        Rng rng(config.seed, {tag(Stream::Verify), static_cast<std::uint64_t>(c)});
        ModelParams params = ModelParams::zeros(spec);
        for (double &t : params.theta) t = 2.0 * std::numbers::pi * rng.uniform();
        std::vector<double> x(static_cast<std::size_t>(spec.n_qubits));
        for (double &v : x) v = std::numbers::pi * rng.uniform();
        const SampleRef sample{x, c % spec.n_classes};
        const std::string tagc = "circuit " + std::to_string(c);

        if (c == 0) {
            const auto exact = theory::empirical_grad_variance(
                spec, params, sample, Shots::exact(), config.verify_repeats, ideal, 0);
            add(tagc + " exact-mode variance", exact.mean, num(bound_at(grid.back()), 6),
                exact.mean <= bound_at(grid.back()));
        }
        std::vector<double> means;
        for (int m : grid) {
            note(progress, tagc + ", M=" + std::to_string(m));
            const auto v = theory::empirical_grad_variance(
                spec, params, sample, Shots::count(m), config.verify_repeats, ideal,
                derive_seed(config.seed, {tag(Stream::Verify), 1000u + static_cast<std::uint64_t>(c),
                                          static_cast<std::uint64_t>(m)}));
            const double b = bound_at(m);
            add(tagc + " mean variance M=" + std::to_string(m), v.mean, num(b, 6), v.mean <= b);
            add(tagc + " total variance M=" + std::to_string(m), v.total, num(b, 6), v.total <= b);
            means.push_back(v.mean);
            max_grad_norm = std::max(max_grad_norm, v.max_grad_norm);
        }
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            const double expected = static_cast<double>(grid[i + 1]) / grid[i];
            const double lo = 0.3 * expected;
            const double hi = 2.0 * expected;
            const double ratio = means[i + 1] > 0 ? means[i] / means[i + 1] : 0.0;
            add(tagc + " ratio var(M=" + std::to_string(grid[i]) + ")/var(M=" +
                    std::to_string(grid[i + 1]) + ")",
                ratio, "[" + num(lo, 4) + ", " + num(hi, 4) + "]", ratio >= lo && ratio <= hi);
        }
    }

    // Convergence-bound evaluators with the empirical gradient bound G.
    theory::BoundParams rate = bp;
    rate.grad_bound = max_grad_norm;
    rate.shots = config.train.shots.is_exact() ? grid.back() : config.train.shots.value();
    const double phi = theory::phi_k(rate);
    add("phi_k (empirical G = " + num(max_grad_norm, 4) + ")", phi, "-", true, true);
    add("theorem1 rate K=" + std::to_string(config.rounds), theory::theorem1_rate(rate, config.rounds, 1.0),
        "-", true, true);
    bool monotone = true;
    double prev = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        theory::BoundParams p = rate;
        p.shots = grid[i];
        const double r = theory::theorem1_rate(p, config.rounds, 1.0);
        if (i > 0 && r > prev) monotone = false;
        prev = r;
    }
    add("theorem1 rate non-increasing in M", prev, "monotone", monotone);
    add("iterations for delta=0.01",
        static_cast<double>(theory::shot_noise_iterations(0.01, rate.mu, rate.smoothness,
                                                          bound_at(static_cast<int>(rate.shots)),
                                                          config.iteration_constant)),
        "-", true, true);

    std::ostringstream table;
    table << "# nu = " << num(bp.nu) << " (free calibration constant), Tr(H^2) = "
          << num(bp.trace_h2) << " (single-qubit Z), N_h = " << num(bp.n_outcomes)
          << ", D = " << n_params << "\n";
    table << "# setting: ideal gates and readout, finite shots, " << config.verify_repeats
          << " repeats, " << config.verify_circuits << " circuits\n";
    table << pad("quantity", 44) << pad("empirical", 16) << pad("bound", 18) << "status\n";
    std::ostringstream csv;
    csv << "quantity,empirical,bound,status\n";
    for (const auto &c : result.checks) {
        table << pad(c.quantity, 44) << pad(num(c.empirical, 6), 16) << pad(c.bound, 18)
              << c.status << '\n';
        csv << csv_field(c.quantity) << ',' << num(c.empirical) << ',' << csv_field(c.bound) << ','
            << c.status << '\n';
    }
    table << (result.all_pass ? "all checks passed\n" : "some checks FAILED\n");
    result.table = table.str();
    ensure_dir(out_dir);
    write_file(out_dir / "bounds.csv", csv.str());
    write_file(out_dir / "resolved.cfg", render_config(config));
    return result;
}

} // namespace qfed
