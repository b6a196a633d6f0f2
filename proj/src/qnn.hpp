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
 * Variational quantum classifier: RY angle encoding, a layered RY/RZ + CZ
 * chain ansatz, per-class Z readout and parameter-shift gradients.
 *
 * Class k is read from <Z> on qubit k; the K expectations are used directly
 * as softmax logits for the cross-entropy loss.
 */
#pragma once

#include "noise.hpp"
#include "rng.hpp"
#include "statevector.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace qfed {

struct QnnSpec {
    int n_qubits = 4;
    int n_layers = 2;
    int n_classes = 2;

    /// One RY and one RZ angle per qubit per layer.
    [[nodiscard]] int n_params() const { return 2 * n_qubits * n_layers; }
    void validate() const;
};

struct ModelParams {
    std::vector<double> theta;

    ModelParams() = default;
    explicit ModelParams(std::vector<double> values) : theta(std::move(values)) {}
    static ModelParams zeros(const QnnSpec &spec) {
        return ModelParams(std::vector<double>(static_cast<std::size_t>(spec.n_params()), 0.0));
    }

    [[nodiscard]] std::size_t size() const { return theta.size(); }
    double &operator[](std::size_t i) { return theta[i]; }
    double operator[](std::size_t i) const { return theta[i]; }
    bool operator==(const ModelParams &) const = default;
};

void check_params(const QnnSpec &spec, const ModelParams &params);

struct Prediction {
    std::vector<double> expectations;
    std::vector<double> probabilities;

    [[nodiscard]] int predicted_class() const;
};

/// Shot budget for one expectation estimate; `exact()` selects the
/// noiseless infinite-shot limit.
class Shots {
  public:
    static Shots exact() { return Shots(0); }
    static Shots count(int m);

    [[nodiscard]] bool is_exact() const { return m_ == 0; }
    [[nodiscard]] int value() const { return m_; }
    bool operator==(const Shots &) const = default;

  private:
    explicit Shots(int m) : m_(m) {}
    int m_;
};

struct SampleRef {
    std::span<const double> features;
    int label = 0;
};

std::vector<double> softmax(std::span<const double> logits);

/// RY(features[i]) on qubit i.
Circuit encode(std::span<const double> features, int n_qubits);

Circuit build_pqc(const QnnSpec &spec, const ModelParams &params);

/// encode(features) followed by build_pqc(params).
Circuit model_circuit(const QnnSpec &spec, const ModelParams &params,
                      std::span<const double> features);

Prediction forward_exact(const QnnSpec &spec, const ModelParams &params,
                         std::span<const double> features);

/// Finite-shot estimate: every shot is one noisy trajectory, measured on all
/// class qubits at once, with readout flips applied per qubit.
Prediction forward_shots(const QnnSpec &spec, const ModelParams &params,
                         std::span<const double> features, int shots, const NoiseModel &noise,
                         Rng &rng);

/// Dispatches on `shots.is_exact()`; `noise` is ignored in exact mode.
Prediction forward(const QnnSpec &spec, const ModelParams &params,
                   std::span<const double> features, Shots shots, const NoiseModel &noise,
                   Rng &rng);

double loss_ce(const Prediction &pred, int label);

/// Gradient of the cross-entropy loss. Each df_k/dtheta_d comes from the
/// +-pi/2 shift rule; the softmax/CE part is assembled classically. Every
/// circuit evaluation draws from its own substream of `stream_seed`, keyed by
/// (parameter, shift direction), so the result does not depend on the order
/// of evaluation.
std::vector<double> param_shift_grad(const QnnSpec &spec, const ModelParams &params,
                                     SampleRef sample, Shots shots, const NoiseModel &noise,
                                     std::uint64_t stream_seed);

/// Central differences of loss_ce(forward_exact) with step h.
std::vector<double> finite_diff_grad(const QnnSpec &spec, const ModelParams &params,
                                     SampleRef sample, double h = 1e-4);

} // namespace qfed
