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
#include "qnn.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace qfed {

void QnnSpec::validate() const {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        fail(ErrorCode::Config, "qnn.n_qubits must be in 1.." + std::to_string(kMaxQubits));
    }
    if (n_layers < 1 || n_layers > 10) {
        fail(ErrorCode::Config, "qnn.n_layers must be in 1..10");
    }
    if (n_classes < 1 || n_classes > n_qubits) {
        fail(ErrorCode::Config, "qnn.n_classes (" + std::to_string(n_classes) +
                                    ") must be in 1..n_qubits (" + std::to_string(n_qubits) +
                                    ")");
    }
}

void check_params(const QnnSpec &spec, const ModelParams &params) {
    if (params.size() != static_cast<std::size_t>(spec.n_params())) {
        fail(ErrorCode::Shape, "expected " + std::to_string(spec.n_params()) +
                                   " parameters, got " + std::to_string(params.size()));
    }
}

int Prediction::predicted_class() const {
    return static_cast<int>(std::max_element(expectations.begin(), expectations.end()) -
                            expectations.begin());
}

Shots Shots::count(int m) {
    if (m < 1) {
        fail(ErrorCode::InvalidShots, "shot count must be >= 1, got " + std::to_string(m));
    }
    return Shots(m);
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> p(logits.begin(), logits.end());
    if (p.empty()) {
        return p;
    }
    const double mx = *std::max_element(p.begin(), p.end());
    double sum = 0.0;
    for (double &v : p) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double &v : p) {
        v /= sum;
    }
    return p;
}

Circuit encode(std::span<const double> features, int n_qubits) {
    if (features.size() != static_cast<std::size_t>(n_qubits)) {
        fail(ErrorCode::Shape, "expected " + std::to_string(n_qubits) + " features, got " +
                                   std::to_string(features.size()));
    }
    Circuit c(n_qubits);
    for (int i = 0; i < n_qubits; ++i) {
        c.add(Gate::ry(i, features[static_cast<std::size_t>(i)]));
    }
    return c;
}

Circuit build_pqc(const QnnSpec &spec, const ModelParams &params) {
    check_params(spec, params);
    const int n = spec.n_qubits;
    Circuit c(n);
    std::size_t k = 0;
    for (int layer = 0; layer < spec.n_layers; ++layer) {
        for (int q = 0; q < n; ++q) {
            c.add(Gate::ry(q, params[k++]));
        }
        for (int q = 0; q < n; ++q) {
            c.add(Gate::rz(q, params[k++]));
        }
        for (int q = 0; q + 1 < n; ++q) {
            c.add(Gate::cz(q, q + 1));
        }
    }
    return c;
}

Circuit model_circuit(const QnnSpec &spec, const ModelParams &params,
                      std::span<const double> features) {
    Circuit c = encode(features, spec.n_qubits);
    c.append(build_pqc(spec, params));
    return c;
}

namespace {

Prediction make_prediction(std::vector<double> expectations) {
    Prediction p;
    p.probabilities = softmax(expectations);
    p.expectations = std::move(expectations);
    return p;
}

} // namespace

Prediction forward_exact(const QnnSpec &spec, const ModelParams &params,
                         std::span<const double> features) {
    const StateVector out = run_circuit(StateVector(spec.n_qubits), model_circuit(spec, params, features));
    std::vector<double> f(static_cast<std::size_t>(spec.n_classes));
    for (int k = 0; k < spec.n_classes; ++k) {
        f[static_cast<std::size_t>(k)] = expectation_z(out, k);
    }
    return make_prediction(std::move(f));
}

Prediction forward_shots(const QnnSpec &spec, const ModelParams &params,
                         std::span<const double> features, int shots, const NoiseModel &noise,
                         Rng &rng) {
    if (shots < 1) {
        fail(ErrorCode::InvalidShots, "shot count must be >= 1, got " + std::to_string(shots));
    }
    TrajectorySampler sampler(StateVector(spec.n_qubits), model_circuit(spec, params, features),
                              noise);
    const auto K = static_cast<std::size_t>(spec.n_classes);
    std::vector<long> sums(K, 0);
    for (int j = 0; j < shots; ++j) {
        const std::size_t outcome = sampler.shot(rng);
        for (std::size_t k = 0; k < K; ++k) {
            const int h = (outcome >> k) & 1U ? -1 : +1;
            sums[k] += apply_readout_flip(h, static_cast<int>(k), noise, rng);
        }
    }
    std::vector<double> f(K);
    for (std::size_t k = 0; k < K; ++k) {
        f[k] = static_cast<double>(sums[k]) / shots;
    }
    return make_prediction(std::move(f));
}

Prediction forward(const QnnSpec &spec, const ModelParams &params,
                   std::span<const double> features, Shots shots, const NoiseModel &noise,
                   Rng &rng) {
    if (shots.is_exact()) {
        return forward_exact(spec, params, features);
    }
    return forward_shots(spec, params, features, shots.value(), noise, rng);
}

double loss_ce(const Prediction &pred, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= pred.probabilities.size()) {
        fail(ErrorCode::Shape, "label " + std::to_string(label) + " out of range for " +
                                   std::to_string(pred.probabilities.size()) + " classes");
    }
    return -std::log(std::max(pred.probabilities[static_cast<std::size_t>(label)], 1e-12));
}

std::vector<double> param_shift_grad(const QnnSpec &spec, const ModelParams &params,
                                     SampleRef sample, Shots shots, const NoiseModel &noise,
                                     std::uint64_t stream_seed) {
    check_params(spec, params);
    if (sample.label < 0 || sample.label >= spec.n_classes) {
        fail(ErrorCode::Shape, "label " + std::to_string(sample.label) + " out of range");
    }
    constexpr double kShift = std::numbers::pi / 2;
    const std::size_t P = params.size();
    const auto K = static_cast<std::size_t>(spec.n_classes);

    auto eval = [&](const ModelParams &p, std::uint64_t index, std::uint64_t direction) {
        Rng rng(stream_seed, {index, direction});
        return forward(spec, p, sample.features, shots, noise, rng);
    };

    const Prediction base = eval(params, P, 2);
    std::vector<double> residual(K);
    for (std::size_t k = 0; k < K; ++k) {
        residual[k] = base.probabilities[k] - (static_cast<int>(k) == sample.label ? 1.0 : 0.0);
    }

    std::vector<double> grad(P, 0.0);
    ModelParams shifted = params;
    for (std::size_t d = 0; d < P; ++d) {
        shifted[d] = params[d] + kShift;
        const Prediction plus = eval(shifted, d, 0);
        shifted[d] = params[d] - kShift;
        const Prediction minus = eval(shifted, d, 1);
        shifted[d] = params[d];
        double g = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            g += residual[k] * 0.5 * (plus.expectations[k] - minus.expectations[k]);
        }
        grad[d] = g;
    }
    return grad;
}

std::vector<double> finite_diff_grad(const QnnSpec &spec, const ModelParams &params,
                                     SampleRef sample, double h) {
    check_params(spec, params);
    std::vector<double> grad(params.size());
    ModelParams p = params;
    for (std::size_t d = 0; d < params.size(); ++d) {
        p[d] = params[d] + h;
        const double up = loss_ce(forward_exact(spec, p, sample.features), sample.label);
        p[d] = params[d] - h;
        const double down = loss_ce(forward_exact(spec, p, sample.features), sample.label);
        p[d] = params[d];
        grad[d] = (up - down) / (2 * h);
    }
    return grad;
}

} // namespace qfed
