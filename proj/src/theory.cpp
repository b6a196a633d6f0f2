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
#include "theory.hpp"

#include "error.hpp"
#include "rng.hpp"

#include <cmath>
#include <string>

namespace qfed::theory {

namespace {

void require_positive(double v, const char *name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        fail(ErrorCode::Domain, std::string(name) + " must be positive and finite");
    }
}

} // namespace

double lemma1_variance(const BoundParams &p) {
    require_positive(p.nu, "nu");
    require_positive(p.n_outcomes, "N_h");
    require_positive(p.n_params, "D");
    require_positive(p.trace_h2, "Tr(H^2)");
    if (!(p.shots >= 1.0)) {
        fail(ErrorCode::Domain, "M must be >= 1");
    }
    return p.nu * p.n_outcomes * p.n_params * p.trace_h2 / (2.0 * p.shots);
}

double lemma1_aggregate_bound(const BoundParams &p) {
    require_positive(p.n_clients, "N");
    return lemma1_variance(p) / (p.n_clients * p.n_clients);
}

double gap_bound(const BoundParams &p, int steps, double initial_gap) {
    require_positive(p.eta, "eta");
    require_positive(p.mu, "mu");
    require_positive(p.smoothness, "L");
    const double contraction = p.eta * p.mu;
    if (contraction >= 1.0) {
        fail(ErrorCode::Domain, "gap bound needs eta * mu < 1");
    }
    if (steps < 0) {
        fail(ErrorCode::Domain, "T must be >= 0");
    }
    // nu = 0 is the noiseless limit, as in phi_k.
    const double v = p.nu == 0.0 ? 0.0 : lemma1_variance(p);
    return std::pow(1.0 - contraction, steps) * initial_gap +
           0.5 * p.eta * p.smoothness * v / p.mu;
}

double phi_k(const BoundParams &p) {
    if (p.eta == 0.0) {
        fail(ErrorCode::Domain, "Phi_K is undefined at eta = 0");
    }
    const double eta = p.eta;
    const double lam = p.lambda;
    const double x = p.x_bar;

    const double drift_coeff =
        2 * lam * eta * eta * (1 + eta) +
        (2 * lam * eta * eta * x +
         2 * p.smoothness_p * (1 + 2 * lam + lam * eta + 2 * lam / eta + 1 / (2 * eta)) * x);
    const double drift = 0.5 * eta * drift_coeff * p.local_steps * p.grad_bound * p.grad_bound;

    // nu = 0 switches the shot-noise term off; lemma1_variance rejects it.
    double shot = 0.0;
    if (p.nu != 0.0) {
        require_positive(p.n_clients, "N");
        const double per_client =
            p.nu * p.n_outcomes * p.n_params * p.trace_h2 /
            (2 * p.shots * p.n_clients * p.n_clients);
        shot = (1 + 1 / (2 * eta)) * x * x * p.n_clients * per_client;
    }
    return drift + shot;
}

double theorem1_rate_with_phi(const BoundParams &p, double phi, int rounds,
                              double initial_distance_sq) {
    require_positive(p.mu, "mu");
    require_positive(p.smoothness, "L");
    if (rounds < 0) {
        fail(ErrorCode::Domain, "K must be >= 0");
    }
    const double L = p.smoothness;
    const double mu = p.mu;
    return L / (2 * (rounds + L / mu)) *
           (9 * phi / (8 * mu * mu) + (L / mu + 1) * initial_distance_sq);
}

double theorem1_rate(const BoundParams &p, int rounds, double initial_distance_sq) {
    return theorem1_rate_with_phi(p, phi_k(p), rounds, initial_distance_sq);
}

long shot_noise_iterations(double delta, double mu, double smoothness, double variance,
                           double c) {
    require_positive(delta, "delta");
    require_positive(mu, "mu");
    require_positive(smoothness, "L");
    require_positive(c, "c");
    if (!(variance >= 0.0)) {
        fail(ErrorCode::Domain, "V must be >= 0");
    }
    const double t = c * (std::log(1.0 / delta) + variance / (delta * mu)) * smoothness / mu;
    // Absorb rounding noise so exact integers do not round up.
    return static_cast<long>(std::ceil(t - 1e-9));
}

GradVariance empirical_grad_variance(const QnnSpec &spec, const ModelParams &params,
                                     SampleRef sample, Shots shots, int repeats,
                                     const NoiseModel &noise, std::uint64_t seed) {
    if (repeats < 30) {
        fail(ErrorCode::Config, "empirical gradient variance needs at least 30 repeats");
    }
    const std::size_t P = params.size();
    std::vector<double> mean(P, 0.0), m2(P, 0.0);
    GradVariance out;
    for (int r = 0; r < repeats; ++r) {
        const auto g = param_shift_grad(spec, params, sample, shots, noise,
                                        derive_seed(seed, {static_cast<std::uint64_t>(r)}));
        double norm2 = 0.0;
        for (std::size_t d = 0; d < P; ++d) {
            // Welford update.
            const double delta = g[d] - mean[d];
            mean[d] += delta / (r + 1);
            m2[d] += delta * (g[d] - mean[d]);
            norm2 += g[d] * g[d];
        }
        out.max_grad_norm = std::max(out.max_grad_norm, std::sqrt(norm2));
    }
    out.per_param.resize(P);
    for (std::size_t d = 0; d < P; ++d) {
        out.per_param[d] = m2[d] / (repeats - 1);
        out.total += out.per_param[d];
    }
    out.mean = P ? out.total / static_cast<double>(P) : 0.0;
    return out;
}

} // namespace qfed::theory
