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
// Independent oracles for the test suites. Everything here is written from
// the textbook definitions with dense matrices and shares no code with the
// library's in-place kernels.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace oracle {

using C = std::complex<double>;
using Vec = std::vector<C>;
using Mat = std::vector<Vec>;

struct M2 {
    C a, b, c, d; // [[a, b], [c, d]]
};

inline M2 ry(double t) {
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    return {c, -s, s, c};
}

inline M2 rx(double t) {
    const double c = std::cos(t / 2), s = std::sin(t / 2);
    return {c, C(0, -s), C(0, -s), c};
}

inline M2 rz(double t) { return {std::polar(1.0, -t / 2), 0.0, 0.0, std::polar(1.0, t / 2)}; }

inline M2 pauli_x() { return {0.0, 1.0, 1.0, 0.0}; }
inline M2 pauli_y() { return {0.0, C(0, -1), C(0, 1), 0.0}; }
inline M2 pauli_z() { return {1.0, 0.0, 0.0, -1.0}; }

inline int bit(std::size_t i, int q) { return static_cast<int>((i >> q) & 1u); }

/// Full 2^n matrix of a one-qubit gate on qubit q (qubit 0 = least-significant bit).
inline Mat embed(const M2 &m, int q, int n) {
    const std::size_t dim = std::size_t{1} << n;
    Mat out(dim, Vec(dim, 0.0));
    const std::size_t mask = std::size_t{1} << q;
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            if ((i & ~mask) != (j & ~mask)) continue;
            const int r = bit(i, q), c = bit(j, q);
            out[i][j] = r == 0 ? (c == 0 ? m.a : m.b) : (c == 0 ? m.c : m.d);
        }
    }
    return out;
}

inline Mat cnot(int control, int target, int n) {
    const std::size_t dim = std::size_t{1} << n;
    Mat out(dim, Vec(dim, 0.0));
    for (std::size_t j = 0; j < dim; ++j) {
        const std::size_t i = bit(j, control) ? j ^ (std::size_t{1} << target) : j;
        out[i][j] = 1.0;
    }
    return out;
}

inline Mat cz(int a, int b, int n) {
    const std::size_t dim = std::size_t{1} << n;
    Mat out(dim, Vec(dim, 0.0));
    for (std::size_t j = 0; j < dim; ++j) out[j][j] = (bit(j, a) && bit(j, b)) ? -1.0 : 1.0;
    return out;
}

inline Vec mul(const Mat &m, const Vec &v) {
    Vec out(v.size(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
    }
    return out;
}

inline Vec zero_state(int n) {
    Vec v(std::size_t{1} << n, 0.0);
    v[0] = 1.0;
    return v;
}

inline double expect_z(const Vec &v, int q) {
    double e = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) e += (bit(i, q) ? -1.0 : 1.0) * std::norm(v[i]);
    return e;
}

/// <Z_k> for k < n_classes of the classifier: RY encoding, then per layer
/// RY on every qubit, RZ on every qubit and a CZ chain. theta is laid out
/// layer-major: [RY q0..q(n-1), RZ q0..q(n-1)] per layer.
inline std::vector<double> classifier_expectations(int n, int layers, int n_classes,
                                                   const std::vector<double> &theta,
                                                   const std::vector<double> &x) {
    Vec v = zero_state(n);
    for (int q = 0; q < n; ++q) v = mul(embed(ry(x[q]), q, n), v);
    std::size_t k = 0;
    for (int l = 0; l < layers; ++l) {
        for (int q = 0; q < n; ++q) v = mul(embed(ry(theta[k++]), q, n), v);
        for (int q = 0; q < n; ++q) v = mul(embed(rz(theta[k++]), q, n), v);
        for (int q = 0; q + 1 < n; ++q) v = mul(cz(q, q + 1, n), v);
    }
    std::vector<double> out;
    for (int c = 0; c < n_classes; ++c) out.push_back(expect_z(v, c));
    return out;
}

inline double softmax_ce(const std::vector<double> &f, int label) {
    double mx = f[0];
    for (double v : f) mx = std::max(mx, v);
    double z = 0.0;
    for (double v : f) z += std::exp(v - mx);
    const double p = std::exp(f[static_cast<std::size_t>(label)] - mx) / z;
    return -std::log(std::max(p, 1e-12));
}

inline std::vector<double> elementwise_mean(const std::vector<std::vector<double>> &xs) {
    std::vector<double> out(xs.front().size(), 0.0);
    for (std::size_t d = 0; d < out.size(); ++d) {
        long double s = 0.0L;
        for (const auto &x : xs) s += x[d];
        out[d] = static_cast<double>(s / xs.size());
    }
    return out;
}

} // namespace oracle
