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
 * The four experiment commands behind the CLI and the C API. Each command
 * validates everything it can before touching the output directory, writes
 * artifacts from the calling thread only, and returns a structured result
 * alongside the human-readable text it would print.
 */
#pragma once

#include "config.hpp"
#include "federation.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace qfed {

using ProgressFn = std::function<void(const std::string &)>;

/// Built-in calibration used when noise.calibration is empty.
NoiseModel default_calibration();

/// Loads, reduces and normalizes the configured dataset.
Dataset load_experiment_data(const ExperimentConfig &config);

/// Calibration, then regime scaling. "none" yields a noiseless model.
NoiseModel load_experiment_noise(const ExperimentConfig &config);

ModelParams initial_params(const ExperimentConfig &config);

/// Everything run_training needs, built from the config alone.
TrainingSetup make_training_setup(const ExperimentConfig &config);

/// One CSV row per round, fixed columns.
std::string metrics_header();
std::string metrics_row(const RoundReport &report);

/// FNV-1a over the QNN shape and ansatz name.
std::uint64_t spec_hash(const QnnSpec &spec);
std::string format_model(const QnnSpec &spec, const ModelParams &params);
ModelParams parse_model(const std::string &text, const QnnSpec &spec);

struct TrainResult {
    std::vector<RoundReport> reports;
    ModelParams final_params;
};

/// Writes metrics.csv (flushed per round), final_model.txt and resolved.cfg.
TrainResult cmd_train(const ExperimentConfig &config, const std::filesystem::path &out_dir,
                      const ProgressFn &progress = {});

struct RunSummary {
    Method method = Method::Spqfl;
    std::uint64_t seed = 0;
    double final_loss = 0.0;
    double final_acc = 0.0;
    /// First round whose global accuracy reaches the threshold; K+1 if never.
    int rounds_to_threshold = 0;
};

struct MethodSummary {
    Method method = Method::Spqfl;
    double mean_final_loss = 0.0;
    double mean_final_acc = 0.0;
    double mean_rounds_to_threshold = 0.0;
    /// Mean accuracy minus the baseline method's (qfl when present).
    double delta_acc = 0.0;
};

struct CompareResult {
    std::vector<RunSummary> runs;
    std::vector<MethodSummary> methods;
    Method baseline = Method::Qfl;
    std::string table;
};

/// Runs every method on seeds seed, seed+1, ... with identical data.
CompareResult cmd_compare(const ExperimentConfig &config, const std::vector<Method> &methods,
                          const std::filesystem::path &out_dir, const ProgressFn &progress = {});

struct SweepRow {
    int shots = 0;
    double final_loss = 0.0;
    double final_acc = 0.0;
    std::vector<double> losses;
};

struct SweepResult {
    std::vector<SweepRow> rows; ///< ascending in shots
    std::string table;
};

SweepResult cmd_sweep_shots(const ExperimentConfig &config, std::vector<int> shots,
                            const std::filesystem::path &out_dir, const ProgressFn &progress = {});

struct BoundCheck {
    std::string quantity;
    double empirical = 0.0;
    std::string bound;
    /// "pass", "FAIL" or "info".
    std::string status;
};

struct VerifyResult {
    std::vector<BoundCheck> checks;
    bool all_pass = true;
    std::string table;
};

VerifyResult cmd_verify_bounds(const ExperimentConfig &config,
                               const std::filesystem::path &out_dir,
                               const ProgressFn &progress = {});

/// RFC-4180 quoting for one field.
std::string csv_field(const std::string &text);

} // namespace qfed
