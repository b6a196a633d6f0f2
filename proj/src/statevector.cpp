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
#include "statevector.hpp"

#include "error.hpp"

#include <cmath>
#include <string>

namespace qfed {

const char *to_string(GateKind kind) {
    switch (kind) {
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CZ: return "CZ";
    case GateKind::PauliX: return "X";
    case GateKind::PauliY: return "Y";
    case GateKind::PauliZ: return "Z";
    }
    return "?";
}

int arity(GateKind kind) {
    return (kind == GateKind::CNOT || kind == GateKind::CZ) ? 2 : 1;
}

bool is_rotation(GateKind kind) {
    return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ;
}

void validate_gate(const Gate &gate, int n_qubits) {
    auto bad = [&](int q) { return q < 0 || q >= n_qubits; };
    if (bad(gate.targets[0])) {
        fail(ErrorCode::InvalidGate, std::string(to_string(gate.kind)) + " target " +
                                         std::to_string(gate.targets[0]) + " out of range for " +
                                         std::to_string(n_qubits) + " qubits");
    }
    if (gate.arity() == 2) {
        if (bad(gate.targets[1])) {
            fail(ErrorCode::InvalidGate, std::string(to_string(gate.kind)) + " target " +
                                             std::to_string(gate.targets[1]) +
                                             " out of range for " + std::to_string(n_qubits) +
                                             " qubits");
        }
        if (gate.targets[0] == gate.targets[1]) {
            fail(ErrorCode::InvalidGate,
                 std::string(to_string(gate.kind)) + " needs two distinct qubits");
        }
    }
    if (is_rotation(gate.kind) && !std::isfinite(gate.angle)) {
        fail(ErrorCode::InvalidGate, "non-finite rotation angle");
    }
}

Circuit &Circuit::append(const Circuit &other) {
    if (other.n_qubits != n_qubits) {
        fail(ErrorCode::InvalidCircuit, "cannot append a " + std::to_string(other.n_qubits) +
                                            "-qubit circuit to a " + std::to_string(n_qubits) +
                                            "-qubit circuit");
    }
    gates.insert(gates.end(), other.gates.begin(), other.gates.end());
    return *this;
}

void validate_circuit(const Circuit &circuit) {
    if (circuit.n_qubits < 1 || circuit.n_qubits > kMaxQubits) {
        fail(ErrorCode::InvalidCircuit,
             "circuit width " + std::to_string(circuit.n_qubits) + " outside 1.." +
                 std::to_string(kMaxQubits));
    }
    for (const Gate &g : circuit.gates) {
        validate_gate(g, circuit.n_qubits);
    }
}

namespace {

void check_width(int n) {
    if (n < 1 || n > kMaxQubits) {
        fail(ErrorCode::Shape, "statevector width " + std::to_string(n) + " outside 1.." +
                                   std::to_string(kMaxQubits));
    }
}

} // namespace

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
    check_width(n_qubits);
    amps_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
    amps_[0] = 1.0;
}

StateVector StateVector::basis(int n_qubits, std::size_t index) {
    StateVector s(n_qubits);
    if (index >= s.dim()) {
        fail(ErrorCode::Shape, "basis index " + std::to_string(index) + " out of range");
    }
    s.amps_[0] = 0.0;
    s.amps_[index] = 1.0;
    return s;
}

StateVector StateVector::from_amplitudes(std::vector<Complex> amplitudes) {
    const std::size_t dim = amplitudes.size();
    if (dim < 2 || (dim & (dim - 1)) != 0) {
        fail(ErrorCode::Shape, "amplitude count " + std::to_string(dim) + " is not 2^n");
    }
    int n = 0;
    while ((std::size_t{1} << n) < dim) {
        ++n;
    }
    check_width(n);
    double norm = 0.0;
    for (const Complex &a : amplitudes) {
        norm += std::norm(a);
    }
    if (std::abs(norm - 1.0) > 1e-10) {
        fail(ErrorCode::Shape, "amplitudes are not normalized");
    }
    return StateVector(n, std::move(amplitudes));
}

double StateVector::norm_squared() const {
    double s = 0.0;
    for (const Complex &a : amps_) {
        s += std::norm(a);
    }
    return s;
}

void StateVector::apply_1q(int q, const std::array<Complex, 4> &m) {
    const std::size_t stride = std::size_t{1} << q;
    const std::size_t dim = amps_.size();
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t i = base; i < base + stride; ++i) {
            const Complex a0 = amps_[i];
            const Complex a1 = amps_[i + stride];
            amps_[i] = m[0] * a0 + m[1] * a1;
            amps_[i + stride] = m[2] * a0 + m[3] * a1;
        }
    }
}

void StateVector::apply_diag_1q(int q, Complex d0, Complex d1) {
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        amps_[i] *= (i & bit) ? d1 : d0;
    }
}

void StateVector::apply(const Gate &gate) {
    const int q = gate.targets[0];
    switch (gate.kind) {
    case GateKind::RX: {
        const double c = std::cos(gate.angle / 2), s = std::sin(gate.angle / 2);
        apply_1q(q, {Complex{c, 0}, Complex{0, -s}, Complex{0, -s}, Complex{c, 0}});
        break;
    }
    case GateKind::RY: {
        const double c = std::cos(gate.angle / 2), s = std::sin(gate.angle / 2);
        // Real rotation; avoid the complex multiply path.
        const std::size_t stride = std::size_t{1} << q;
        for (std::size_t base = 0; base < amps_.size(); base += 2 * stride) {
            for (std::size_t i = base; i < base + stride; ++i) {
                const Complex a0 = amps_[i];
                const Complex a1 = amps_[i + stride];
                amps_[i] = c * a0 - s * a1;
                amps_[i + stride] = s * a0 + c * a1;
            }
        }
        break;
    }
    case GateKind::RZ: {
        const double h = gate.angle / 2;
        apply_diag_1q(q, std::polar(1.0, -h), std::polar(1.0, h));
        break;
    }
    case GateKind::PauliX: {
        const std::size_t stride = std::size_t{1} << q;
        for (std::size_t base = 0; base < amps_.size(); base += 2 * stride) {
            for (std::size_t i = base; i < base + stride; ++i) {
                std::swap(amps_[i], amps_[i + stride]);
            }
        }
        break;
    }
    case GateKind::PauliY: {
        // Y = [[0, -i], [i, 0]]
        const std::size_t stride = std::size_t{1} << q;
        const Complex I{0.0, 1.0};
        for (std::size_t base = 0; base < amps_.size(); base += 2 * stride) {
            for (std::size_t i = base; i < base + stride; ++i) {
                const Complex a0 = amps_[i];
                const Complex a1 = amps_[i + stride];
                amps_[i] = -I * a1;
                amps_[i + stride] = I * a0;
            }
        }
        break;
    }
    case GateKind::PauliZ: apply_diag_1q(q, 1.0, -1.0); break;
    case GateKind::CNOT: {
        const std::size_t cbit = std::size_t{1} << gate.targets[0];
        const std::size_t tbit = std::size_t{1} << gate.targets[1];
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & cbit) && !(i & tbit)) {
                std::swap(amps_[i], amps_[i | tbit]);
            }
        }
        break;
    }
    case GateKind::CZ: {
        const std::size_t mask =
            (std::size_t{1} << gate.targets[0]) | (std::size_t{1} << gate.targets[1]);
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & mask) == mask) {
                amps_[i] = -amps_[i];
            }
        }
        break;
    }
    }
}

void StateVector::apply_checked(const Gate &gate) {
    validate_gate(gate, n_qubits_);
    apply(gate);
}

StateVector apply_gate(StateVector state, const Gate &gate) {
    state.apply_checked(gate);
    return state;
}

StateVector run_circuit(StateVector initial, const Circuit &circuit) {
    if (circuit.n_qubits != initial.n_qubits()) {
        fail(ErrorCode::InvalidCircuit, "circuit has " + std::to_string(circuit.n_qubits) +
                                            " qubits, state has " +
                                            std::to_string(initial.n_qubits()));
    }
    validate_circuit(circuit);
    for (const Gate &g : circuit.gates) {
        initial.apply(g);
    }
    return initial;
}

double expectation_z(const StateVector &state, int qubit) {
    if (qubit < 0 || qubit >= state.n_qubits()) {
        fail(ErrorCode::InvalidGate, "measured qubit " + std::to_string(qubit) + " out of range");
    }
    const std::size_t bit = std::size_t{1} << qubit;
    const auto amps = state.amplitudes();
    double e = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const double p = std::norm(amps[i]);
        e += (i & bit) ? -p : p;
    }
    return e;
}

int sample_z(const StateVector &state, int qubit, Rng &rng) {
    const double f = expectation_z(state, qubit);
    const double p_plus = 0.5 * (1.0 + f);
    return rng.uniform() < p_plus ? +1 : -1;
}

std::size_t sample_basis(const StateVector &state, Rng &rng) {
    const double u = rng.uniform() * state.norm_squared();
    const auto amps = state.amplitudes();
    double acc = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        acc += std::norm(amps[i]);
        if (u < acc) {
            return i;
        }
    }
    // Rounding can leave u just above the final partial sum.
    for (std::size_t i = amps.size(); i-- > 0;) {
        if (std::norm(amps[i]) > 0.0) {
            return i;
        }
    }
    return 0;
}

} // namespace qfed
