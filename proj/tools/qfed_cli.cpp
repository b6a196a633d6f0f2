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
// Command-line front end. Talks to the simulator only through the C API.

#include "qfed/qfed.h"

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> workers;
    std::string methods;
    std::vector<int> shots;
    bool quiet = false;
};

using ExperimentPtr = std::unique_ptr<qfed_experiment, decltype(&qfed_experiment_free)>;

int report_error(qfed_status status) {
    std::fprintf(stderr, "qfed: %s: %s\n", qfed_status_name(status), qfed_last_error());
    return status == QFED_CHECK_FAILED ? kExitCheckFailed : kExitUsage;
}

void print_progress(const char *message, void *) { std::fprintf(stderr, "  %s\n", message); }

int run(const std::string &command, const Options &opt) {
    qfed_experiment *raw = nullptr;
    qfed_status st = opt.config.empty() ? qfed_experiment_from_string("", &raw)
                                        : qfed_experiment_load(opt.config.c_str(), &raw);
    if (st != QFED_OK) return report_error(st);
    ExperimentPtr exp(raw, &qfed_experiment_free);

    if (opt.seed) qfed_experiment_set_seed(exp.get(), *opt.seed);
    if (opt.out) qfed_experiment_set_output_dir(exp.get(), opt.out->c_str());
    if (opt.workers && (st = qfed_experiment_set_workers(exp.get(), *opt.workers)) != QFED_OK) {
        return report_error(st);
    }
    if (!opt.quiet) qfed_experiment_set_progress(exp.get(), &print_progress, nullptr);

    if (command == "train") {
        st = qfed_experiment_train(exp.get());
    } else if (command == "compare") {
        st = qfed_experiment_compare(exp.get(), opt.methods.empty() ? nullptr : opt.methods.c_str());
    } else if (command == "sweep-shots") {
        st = opt.shots.empty()
                 ? qfed_experiment_sweep_shots(exp.get(), nullptr, 0)
                 : qfed_experiment_sweep_shots(exp.get(), opt.shots.data(), opt.shots.size());
    } else {
        st = qfed_experiment_verify_bounds(exp.get());
    }
    // The table is printed even when a bound check failed.
    std::fputs(qfed_experiment_report(exp.get()), stdout);
    return st == QFED_OK ? kExitOk : report_error(st);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Quantum federated learning simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", qfed_version());

    Options opt;
    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--config", opt.config, "Experiment config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", opt.seed, "Root seed, overrides the config");
        sub->add_option("--out", opt.out, "Output directory, overrides output.dir");
        sub->add_option("--workers", opt.workers, "Client worker threads");
        sub->add_flag("-q,--quiet", opt.quiet, "No progress output");
    };

    auto *train = app.add_subcommand("train", "Train one federated model");
    auto *compare = app.add_subcommand("compare", "Run several methods on identical data");
    auto *sweep = app.add_subcommand("sweep-shots", "Train once per shot count");
    auto *verify = app.add_subcommand("verify-bounds", "Check measured variance against the bounds");
    for (auto *sub : {train, compare, sweep, verify}) add_common(sub);
    compare->add_option("--methods", opt.methods, "Comma-separated subset of qfl,pqfl,spqfl");
    sweep->add_option("--shots", opt.shots, "Comma-separated shot counts")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    for (auto *sub : app.get_subcommands()) return run(sub->get_name(), opt);
    return kExitUsage;
}
