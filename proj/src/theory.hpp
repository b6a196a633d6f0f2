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
 * Closed-form bound evaluators and empirical gradient-variance validators.
 *
 * Conventions: the observable is single-qubit Z, so the number of outcomes
 * N_h is 2 and Tr(H^2) is taken in the qubit's own 2-dimensional space
 * (Tr(Z^2) = 2). The hardware constant nu has no closed form and is a free
 * calibration scalar, 1 by default.
 */
#pragma once

#include "noise.hpp"
#include "qnn.hpp"

#include <cstdint>
#include <vector>

namespace qfed::theory {

struct BoundParams {
    double nu = 1.0;
    double n_outcomes = 2.0; ///< N_h
    double n_params = 1.0;   ///< D
    double trace_h2 = 2.0;   ///< Tr(H^2)
    double shots = 1.0;      ///< M
    double n_clients = 1.0;  ///< N
    double eta = 0.1;
    double lambda = 0.0;
    double mu = 1.0;
    double smoothness = 1.0;  ///< L
    double smoothness_p = 1.0; ///< L_p
    double grad_bound = 0.0;   ///< G
    double local_steps = 1.0;  ///< T
    double x_bar = 1.0;
    double pl_constant = 1.0; ///< vartheta
};

/// sigma_g^2 = nu * N_h * D * Tr(H^2) / (2 M).
double lemma1_variance(const BoundParams &p);

/// sigma_g^2 / N^2, the bound on the averaged gradient's variance.
double lemma1_aggregate_bound(const BoundParams &p);

/// Requires 0 < eta mu < 1. nu = 0 gives V = 0.
/// Requires 0 < eta mu < 1.
double gap_bound(const BoundParams &p, int steps, double initial_gap);

/// Phi_K, written term by term:
///   1/2 eta [2 lambda eta^2 (1 + eta)
///            + 2 lambda eta^2 x + 2 L_p (1 + 2 lambda + lambda eta + 2 lambda / eta
///                                         + 1 / (2 eta)) x] T G^2
///   + (1 + 1 / (2 eta)) x^2 * N * nu N_h D Tr(H^2) / (2 M N^2)
double phi_k(const BoundParams &p);

/// L / (2 (K + L / mu)) * [9 Phi / (8 mu^2) + (L / mu + 1) * dist0].
double theorem1_rate(const BoundParams &p, int rounds, double initial_distance_sq);

/// Same bound with Phi supplied directly.
double theorem1_rate_with_phi(const BoundParams &p, double phi, int rounds,
                              double initial_distance_sq);

/// ceil(c (log(1/delta) + V / (delta mu)) L / mu). The hidden constant of the
/// big-O statement is the explicit `c`.
long shot_noise_iterations(double delta, double mu, double smoothness, double variance,
                           double c = 1.0);

struct GradVariance {
    std::vector<double> per_param;
    double mean = 0.0;
    double total = 0.0;
    /// Largest observed gradient norm over the repeats.
    double max_grad_norm = 0.0;
};

/// Sample variance (n - 1) of each param_shift_grad component over `repeats`
/// independent evaluations at fixed parameters. Needs repeats >= 30.
GradVariance empirical_grad_variance(const QnnSpec &spec, const ModelParams &params,
                                     SampleRef sample, Shots shots, int repeats,
                                     const NoiseModel &noise, std::uint64_t seed);

} // namespace qfed::theory
