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
 * Dense statevector simulation for small circuits.
 *
 * Qubit 0 is the least-significant bit of the basis index, so the amplitude
 * of |q_{n-1} ... q_1 q_0> lives at index sum_q q_q * 2^q.
 */
#pragma once

#include "rng.hpp"

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qfed {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 12;

enum class GateKind { RX, RY, RZ, CNOT, CZ, PauliX, PauliY, PauliZ };

const char *to_string(GateKind kind);
int arity(GateKind kind);
bool is_rotation(GateKind kind);

/// A gate instance. For CNOT `targets[0]` is the control; CZ is symmetric.
/// Rotations follow R_P(a) = exp(-i a P / 2).
struct Gate {
    GateKind kind = GateKind::PauliX;
    std::array<int, 2> targets{0, -1};
    double angle = 0.0;

    static Gate rx(int q, double a) { return {GateKind::RX, {q, -1}, a}; }
    static Gate ry(int q, double a) { return {GateKind::RY, {q, -1}, a}; }
    static Gate rz(int q, double a) { return {GateKind::RZ, {q, -1}, a}; }
    static Gate x(int q) { return {GateKind::PauliX, {q, -1}, 0.0}; }
    static Gate y(int q) { return {GateKind::PauliY, {q, -1}, 0.0}; }
    static Gate z(int q) { return {GateKind::PauliZ, {q, -1}, 0.0}; }
    static Gate cnot(int control, int target) { return {GateKind::CNOT, {control, target}, 0.0}; }
    static Gate cz(int a, int b) { return {GateKind::CZ, {a, b}, 0.0}; }

    [[nodiscard]] int arity() const { return qfed::arity(kind); }
};

/// Throws ErrorCode::InvalidGate if the gate does not fit an n-qubit register.
void validate_gate(const Gate &gate, int n_qubits);

struct Circuit {
    int n_qubits = 0;
    std::vector<Gate> gates;

    Circuit() = default;
    explicit Circuit(int n) : n_qubits(n) {}

    Circuit &add(const Gate &g) {
        gates.push_back(g);
        return *this;
    }
    Circuit &append(const Circuit &other);
    [[nodiscard]] std::size_t size() const { return gates.size(); }
};

void validate_circuit(const Circuit &circuit);

class StateVector {
  public:
    /// |0...0> on n qubits.
    explicit StateVector(int n_qubits);

    static StateVector basis(int n_qubits, std::size_t index);
    static StateVector from_amplitudes(std::vector<Complex> amplitudes);

    [[nodiscard]] int n_qubits() const noexcept { return n_qubits_; }
    [[nodiscard]] std::size_t dim() const noexcept { return amps_.size(); }
    [[nodiscard]] std::span<const Complex> amplitudes() const noexcept { return amps_; }
    [[nodiscard]] const Complex &operator[](std::size_t i) const { return amps_[i]; }
    [[nodiscard]] double norm_squared() const;

    /// In-place gate application; the gate must already be validated.
    void apply(const Gate &gate);

    /// Validating in-place application.
    void apply_checked(const Gate &gate);

  private:
    StateVector(int n_qubits, std::vector<Complex> amps)
        : n_qubits_(n_qubits), amps_(std::move(amps)) {}

    void apply_1q(int q, const std::array<Complex, 4> &m);
    void apply_diag_1q(int q, Complex d0, Complex d1);

    int n_qubits_;
    std::vector<Complex> amps_;
};

StateVector apply_gate(StateVector state, const Gate &gate);

/// Applies every gate of `circuit` in order. Throws InvalidCircuit when the
/// register sizes differ.
StateVector run_circuit(StateVector initial, const Circuit &circuit);

/// <Z_q> = sum_i s_i |a_i|^2 with s_i = +1 when bit q of i is 0.
double expectation_z(const StateVector &state, int qubit);

/// One projective Z measurement on `qubit`; consumes exactly one draw.
int sample_z(const StateVector &state, int qubit, Rng &rng);

/// Samples a full computational-basis outcome; consumes exactly one draw.
std::size_t sample_basis(const StateVector &state, Rng &rng);

} // namespace qfed
