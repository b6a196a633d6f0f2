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
 * Experiment configuration: a flat `key = value` text format with dotted
 * section names. See docs/config.md for the full key list.
 */
#pragma once

#include "client.hpp"
#include "federation.hpp"
#include "noise.hpp"
#include "qnn.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace qfed {

enum class DataSource { Synth, Csv, Idx };

enum class InitMode { Zeros, Uniform };

struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    bool record_wall_time = false;

    DataSource source = DataSource::Synth;
    std::string csv_path;
    std::string idx_images;
    std::string idx_labels;
    int declared_classes = 0;
    std::size_t limit = 0;
    std::size_t synth_samples = 200;
    double synth_jitter = kDefaultJitter;

    QnnSpec qnn;
    TrainConfig train;
    int rounds = 30;
    InitMode init = InitMode::Zeros;
    double init_scale = 0.1;

    std::string calibration;
    Regime regime = Regime::Low;
    bool recalibrate = false;

    int n_clients = 10;
    std::vector<double> fractions;
    FederationConfig fed;

    double iteration_constant = 1.0;
    std::vector<int> verify_shots{10, 100};
    int verify_circuits = 2;
    int verify_repeats = 200;

    std::vector<Method> compare_methods{Method::Qfl, Method::Pqfl, Method::Spqfl};
    int compare_seeds = 1;
    double acc_threshold = 0.9;

    std::vector<int> sweep_shots{1, 40, 100};

    /// Cross-field checks. Messages start with the offending key.
    void validate() const;
    /// Fills defaults that depend on other fields (fractions).
    void materialize();
};

ExperimentConfig parse_config_text(std::string_view text, const std::string &source = "<string>");
ExperimentConfig parse_config(const std::filesystem::path &path);

/// Every key with its resolved value; parse_config_text(render_config(c))
/// reproduces c.
std::string render_config(const ExperimentConfig &config);

/// Names of all recognised keys, in rendering order.
std::vector<std::string> config_keys();

} // namespace qfed
