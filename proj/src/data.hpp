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
 * Datasets: IDX and CSV ingestion, a synthetic angle-cluster generator,
 * feature pooling, angle normalization and the non-IID shard partitioner.
 */
#pragma once

#include "qnn.hpp"
#include "rng.hpp"

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <span>
#include <vector>

namespace qfed {

struct Dataset {
    int n_features = 0;
    int n_classes = 0;
    /// Row-major n_samples x n_features.
    std::vector<double> features;
    std::vector<int> labels;

    [[nodiscard]] std::size_t size() const { return labels.size(); }
    [[nodiscard]] bool empty() const { return labels.empty(); }
    [[nodiscard]] std::span<const double> row(std::size_t i) const {
        return {features.data() + i * static_cast<std::size_t>(n_features),
                static_cast<std::size_t>(n_features)};
    }
    [[nodiscard]] SampleRef sample(std::size_t i) const { return {row(i), labels[i]}; }
    [[nodiscard]] Dataset subset(std::span<const std::size_t> indices) const;
    /// Throws DataFormat on empty data, bad labels or non-finite features.
    void validate() const;
};

/// Reads an IDX image file (magic 0x00000803) and its label file (magic
/// 0x00000801). Pixels are scaled to [0, 1]; images are flattened row-major.
Dataset load_idx(const std::filesystem::path &images, const std::filesystem::path &labels);

/// Writes an IDX pair; `pixels` holds n*rows*cols bytes.
void write_idx(const std::filesystem::path &images, const std::filesystem::path &labels,
               std::uint32_t rows, std::uint32_t cols, std::span<const std::uint8_t> pixels,
               std::span<const std::uint8_t> label_bytes);

/// Header `f0,...,f{d-1},label`. With `declared_classes` > 0 every label must
/// be below it; otherwise the class count is max(label) + 1.
Dataset load_csv(const std::filesystem::path &path, int declared_classes = 0);

inline constexpr double kDefaultJitter = 0.1 * std::numbers::pi;

/// Class c is centred on a cyclic shift by c of d levels spaced evenly over
/// [0.2 pi, 0.8 pi], with per-feature gaussian jitter of `sigma`, clipped to
/// [0, pi]. Labels cycle 0, 1, ..., C-1.
Dataset synth_dataset(std::uint64_t seed, std::size_t n_samples, int n_classes, int d,
                      double sigma = kDefaultJitter);

/// Centre of class c used by synth_dataset.
std::vector<double> synth_center(int c, int d);

/// Average-pools each row of `rows` (n x width) into d blocks of contiguous
/// features; block b covers [floor(b*width/d), floor((b+1)*width/d)).
std::vector<double> reduce_features(std::span<const double> rows, std::size_t width,
                                    std::size_t d);
Dataset reduce_features(const Dataset &data, int d);

/// Clips to [0, 1] and multiplies by pi. `clipped` counts clipped inputs.
std::vector<double> normalize_to_angles(std::span<const double> values,
                                        std::size_t *clipped = nullptr);

/// Validates positivity and the unit-sum constraint (1e-9).
void validate_fractions(std::span<const double> fractions);

/// Largest-remainder apportionment of n items over `fractions`; ties in the
/// remainder go to the lower index.
std::vector<std::size_t> shard_sizes(std::size_t n, std::span<const double> fractions);

/// Non-IID split: indices are shuffled, stable-sorted by label and dealt out in
/// contiguous runs of shard_sizes(); each shard is then shuffled.
std::vector<std::vector<std::size_t>> partition_noniid(const Dataset &data,
                                                       std::span<const double> fractions,
                                                       Rng &rng);

/// 3 -> (0.25, 0.35, 0.40); 5 -> (0.14, 0.18, 0.22, 0.26, 0.30); any other
/// count -> a linear ramp from 0.09 to 0.16 normalized to sum to 1.
std::vector<double> default_fractions(int n_clients);

} // namespace qfed
