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
#include "noise.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qfed {

const char *to_string(Regime regime) {
    switch (regime) {
    case Regime::Low: return "low";
    case Regime::Medium: return "medium";
    case Regime::High: return "high";
    }
    return "?";
}

Regime parse_regime(std::string_view text) {
    if (text == "low") return Regime::Low;
    if (text == "medium") return Regime::Medium;
    if (text == "high") return Regime::High;
    fail(ErrorCode::Config, "unknown noise regime '" + std::string(text) + "'");
}

double regime_factor(Regime regime) {
    switch (regime) {
    case Regime::Low: return 1.0;
    case Regime::Medium: return 2.0;
    case Regime::High: return 4.0;
    }
    return 1.0;
}

namespace {

std::pair<int, int> pair_key(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

template <typename Map, typename Key>
double lookup(const Map &m, const Key &k, double fallback) {
    auto it = m.find(k);
    return it == m.end() ? fallback : it->second;
}

} // namespace

double NoiseModel::p1_of(int q) const { return lookup(p1, q, default_p1); }

double NoiseModel::p2_of(int a, int b) const { return lookup(p2, pair_key(a, b), default_p2); }

double NoiseModel::readout_of(int q) const { return lookup(readout, q, default_readout); }

double NoiseModel::gate_error(const Gate &gate) const {
    return gate.arity() == 2 ? p2_of(gate.targets[0], gate.targets[1]) : p1_of(gate.targets[0]);
}

bool NoiseModel::gates_noiseless() const {
    auto all_zero = [](const auto &m) {
        return std::all_of(m.begin(), m.end(), [](const auto &kv) { return kv.second == 0.0; });
    };
    return default_p1 == 0.0 && default_p2 == 0.0 && all_zero(p1) && all_zero(p2);
}

bool NoiseModel::noiseless() const {
    return gates_noiseless() && default_readout == 0.0 &&
           std::all_of(readout.begin(), readout.end(),
                       [](const auto &kv) { return kv.second == 0.0; });
}

NoiseModel NoiseModel::uniform(double p1, double p2, double readout) {
    NoiseModel m;
    m.default_p1 = p1;
    m.default_p2 = p2;
    m.default_readout = readout;
    return m;
}

void apply_pauli_error(StateVector &state, PauliError error) {
    switch (error.kind) {
    case PauliKind::X: state.apply(Gate::x(error.qubit)); break;
    case PauliKind::Y: state.apply(Gate::y(error.qubit)); break;
    case PauliKind::Z: state.apply(Gate::z(error.qubit)); break;
    }
}

namespace {

PauliKind draw_kind(Rng &rng) { return static_cast<PauliKind>(rng.below(3)); }

} // namespace

void inject_gate_noise_inplace(StateVector &state, const Gate &gate, const NoiseModel &model,
                               Rng &rng) {
    const double eps = model.gate_error(gate);
    if (eps <= 0.0) {
        return;
    }
    if (rng.uniform() >= eps) {
        return;
    }
    for (int i = 0; i < gate.arity(); ++i) {
        apply_pauli_error(state, {draw_kind(rng), gate.targets[i]});
    }
}

StateVector inject_gate_noise(StateVector state, const Gate &gate, const NoiseModel &model,
                              Rng &rng) {
    validate_gate(gate, state.n_qubits());
    inject_gate_noise_inplace(state, gate, model, rng);
    return state;
}

int apply_readout_flip(int outcome, int qubit, const NoiseModel &model, Rng &rng) {
    const double r = model.readout_of(qubit);
    if (r <= 0.0) {
        return outcome;
    }
    return rng.uniform() < r ? -outcome : outcome;
}

NoiseModel scale_regime(const NoiseModel &model, Regime regime) {
    const double f = regime_factor(regime);
    auto scaled = [f](double p, double cap) { return std::min(p * f, cap); };
    NoiseModel out = model;
    out.default_p1 = scaled(model.default_p1, kMaxP1);
    out.default_p2 = scaled(model.default_p2, kMaxP2);
    out.default_readout = scaled(model.default_readout, kMaxReadout);
    for (auto &[q, p] : out.p1) p = scaled(p, kMaxP1);
    for (auto &[q, p] : out.p2) p = scaled(p, kMaxP2);
    for (auto &[q, p] : out.readout) p = scaled(p, kMaxReadout);
    out.scale = model.scale * f;
    return out;
}

StateVector run_noisy_trajectory(StateVector initial, const Circuit &circuit,
                                 const NoiseModel &model, Rng &rng) {
    if (circuit.n_qubits != initial.n_qubits()) {
        fail(ErrorCode::InvalidCircuit, "circuit and state widths differ");
    }
    validate_circuit(circuit);
    for (const Gate &g : circuit.gates) {
        initial.apply(g);
        inject_gate_noise_inplace(initial, g, model, rng);
    }
    return initial;
}

TrajectorySampler::TrajectorySampler(const StateVector &initial, const Circuit &circuit,
                                     const NoiseModel &model)
    : circuit_(circuit), work_(initial), gates_noiseless_(model.gates_noiseless()) {
    if (circuit.n_qubits != initial.n_qubits()) {
        fail(ErrorCode::InvalidCircuit, "circuit and state widths differ");
    }
    validate_circuit(circuit);
    eps_.reserve(circuit.size());
    for (const Gate &g : circuit.gates) {
        eps_.push_back(model.gate_error(g));
    }
    survival_.assign(1, 1.0);
    for (double e : eps_) {
        survival_.push_back(survival_.back() * (1.0 - e));
    }
    if (gates_noiseless_) {
        prefix_.push_back(run_circuit(initial, circuit));
    } else {
        prefix_.reserve(circuit.size() + 1);
        prefix_.push_back(initial);
        for (const Gate &g : circuit.gates) {
            StateVector next = prefix_.back();
            next.apply(g);
            prefix_.push_back(std::move(next));
        }
    }
    const auto amps = prefix_.back().amplitudes();
    ideal_cdf_.resize(amps.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        acc += std::norm(amps[i]);
        ideal_cdf_[i] = acc;
    }
}

std::size_t TrajectorySampler::shot(Rng &rng) {
    events_.clear();
    const auto &gates = circuit_.gates;
    const auto fire = [&](std::size_t i) {
        for (int t = 0; t < gates[i].arity(); ++t) {
            events_.push_back({i, {draw_kind(rng), gates[i].targets[t]}});
        }
    };
    std::size_t pos = 0;
    while (!gates_noiseless_ && pos < gates.size()) {
        if (survival_[pos] < 1e-300) {
            // A certain error upstream zeroed the survival product.
            for (; pos < gates.size(); ++pos) {
                if (eps_[pos] > 0.0 && rng.uniform() < eps_[pos]) fire(pos);
            }
            break;
        }
        const double threshold = (1.0 - rng.uniform()) * survival_[pos];
        const auto it = std::partition_point(survival_.begin() + static_cast<std::ptrdiff_t>(pos) + 1,
                                             survival_.end(),
                                             [threshold](double s) { return s >= threshold; });
        if (it == survival_.end()) {
            break;
        }
        const auto g = static_cast<std::size_t>(it - survival_.begin()) - 1;
        fire(g);
        pos = g + 1;
    }
    if (events_.empty()) {
        const double u = rng.uniform() * ideal_cdf_.back();
        auto it = std::upper_bound(ideal_cdf_.begin(), ideal_cdf_.end(), u);
        std::size_t idx = static_cast<std::size_t>(it - ideal_cdf_.begin());
        if (idx >= ideal_cdf_.size()) {
            idx = ideal_cdf_.size() - 1;
        }
        return idx;
    }
    std::size_t g = events_.front().gate;
    work_ = prefix_[g + 1];
    std::size_t e = 0;
    for (;;) {
        while (e < events_.size() && events_[e].gate == g) {
            apply_pauli_error(work_, events_[e].error);
            ++e;
        }
        if (++g >= gates.size()) {
            break;
        }
        work_.apply(gates[g]);
    }
    return sample_basis(work_, rng);
}

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void calibration_error(const std::string &source, int line, const std::string &msg) {
    fail(ErrorCode::CalibrationFormat, source + ":" + std::to_string(line) + ": " + msg);
}

int parse_qubit(const std::string &tok, const std::string &source, int line) {
    if (tok.size() < 2 || tok[0] != 'q') {
        calibration_error(source, line, "expected qubit token like q3, got '" + tok + "'");
    }
    int q = 0;
    for (std::size_t i = 1; i < tok.size(); ++i) {
        if (tok[i] < '0' || tok[i] > '9' || q > 1000) {
            calibration_error(source, line, "bad qubit token '" + tok + "'");
        }
        q = q * 10 + (tok[i] - '0');
    }
    return q;
}

double parse_probability(const std::string &text, const std::string &source, int line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception &) {
        calibration_error(source, line, "value '" + text + "' is not a number");
    }
    if (used != text.size()) {
        calibration_error(source, line, "value '" + text + "' is not a number");
    }
    if (!(v >= 0.0 && v <= 1.0)) {
        calibration_error(source, line, "probability " + text + " outside [0, 1]");
    }
    return v;
}

} // namespace

NoiseModel parse_calibration(std::string_view text, const std::string &source) {
    if (text.substr(0, 3) == "\xEF\xBB\xBF") {
        text.remove_prefix(3);
    }
    NoiseModel model;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) {
            raw.erase(hash);
        }
        const std::string line = trim(raw);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            calibration_error(source, line_no, "expected 'key = value'");
        }
        const std::string value_text = trim(std::string_view(line).substr(eq + 1));
        std::istringstream key_stream(trim(std::string_view(line).substr(0, eq)));
        std::vector<std::string> key;
        for (std::string tok; key_stream >> tok;) {
            key.push_back(tok);
        }
        if (key.empty()) {
            calibration_error(source, line_no, "missing key");
        }
        const double v = parse_probability(value_text, source, line_no);
        const std::string &head = key[0];
        if (key.size() == 1 && head == "default_p1") {
            model.default_p1 = v;
        } else if (key.size() == 1 && head == "default_p2") {
            model.default_p2 = v;
        } else if (key.size() == 1 && head == "default_readout") {
            model.default_readout = v;
        } else if (key.size() == 2 && head == "p1") {
            model.p1[parse_qubit(key[1], source, line_no)] = v;
        } else if (key.size() == 2 && head == "readout") {
            model.readout[parse_qubit(key[1], source, line_no)] = v;
        } else if (key.size() == 3 && head == "p2") {
            const int a = parse_qubit(key[1], source, line_no);
            const int b = parse_qubit(key[2], source, line_no);
            if (a == b) {
                calibration_error(source, line_no, "p2 needs two distinct qubits");
            }
            model.p2[pair_key(a, b)] = v;
        } else {
            calibration_error(source, line_no, "unknown key '" + trim(line.substr(0, eq)) + "'");
        }
    }
    return model;
}

NoiseModel load_calibration(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::CalibrationFormat, "cannot open calibration file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_calibration(buf.str(), path.string());
}

std::string format_calibration(const NoiseModel &model) {
    std::ostringstream out;
    char num[64];
    auto put = [&](const std::string &key, double v) {
        std::snprintf(num, sizeof num, "%.17g", v);
        out << key << " = " << num << '\n';
    };
    put("default_p1", model.default_p1);
    put("default_p2", model.default_p2);
    put("default_readout", model.default_readout);
    for (const auto &[q, p] : model.p1) put("p1 q" + std::to_string(q), p);
    for (const auto &[k, p] : model.p2)
        put("p2 q" + std::to_string(k.first) + " q" + std::to_string(k.second), p);
    for (const auto &[q, p] : model.readout) put("readout q" + std::to_string(q), p);
    return out.str();
}

} // namespace qfed
