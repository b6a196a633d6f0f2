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
 * Device-shaped stochastic noise: Pauli errors after gates and readout bit
 * flips, realized as Monte-Carlo trajectories on a pure statevector.
 *
 * A gate with error probability eps is followed, with probability eps, by one
 * uniformly chosen non-identity Pauli on each qubit it touched. Averaged over
 * trajectories this is the channel (1 - eps) rho + eps * mean_P P rho P.
 */
#pragma once

#include "rng.hpp"
#include "statevector.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qfed {

inline constexpr double kMaxP1 = 0.03;
inline constexpr double kMaxP2 = 0.10;
inline constexpr double kMaxReadout = 0.10;

enum class Regime { Low, Medium, High };

const char *to_string(Regime regime);
Regime parse_regime(std::string_view text);
double regime_factor(Regime regime);

struct NoiseModel {
    double default_p1 = 0.0;
    double default_p2 = 0.0;
    double default_readout = 0.0;
    std::map<int, double> p1;
    /// Keyed by the ordered pair (min, max).
    std::map<std::pair<int, int>, double> p2;
    std::map<int, double> readout;
    /// Cumulative regime multiplier already folded into the probabilities.
    double scale = 1.0;

    [[nodiscard]] double p1_of(int q) const;
    [[nodiscard]] double p2_of(int a, int b) const;
    [[nodiscard]] double readout_of(int q) const;
    /// p1 or p2 depending on the gate's arity.
    [[nodiscard]] double gate_error(const Gate &gate) const;
    [[nodiscard]] bool noiseless() const;
    /// True when every gate error is zero (readout may still be noisy).
    [[nodiscard]] bool gates_noiseless() const;

    static NoiseModel none() { return {}; }
    /// Same probability for every single-qubit gate, two-qubit gate and readout.
    static NoiseModel uniform(double p1, double p2, double readout);
};

enum class PauliKind { X, Y, Z };

struct PauliError {
    PauliKind kind;
    int qubit;
};

void apply_pauli_error(StateVector &state, PauliError error);

/// Samples the error that follows `gate` and applies it to `state` in place.
/// Draws nothing when the gate's error probability is zero; otherwise one
/// draw decides whether the error fires and one more per touched qubit picks
/// X, Y or Z uniformly.
void inject_gate_noise_inplace(StateVector &state, const Gate &gate, const NoiseModel &model,
                               Rng &rng);

StateVector inject_gate_noise(StateVector state, const Gate &gate, const NoiseModel &model,
                              Rng &rng);

/// Returns -outcome with probability readout_of(qubit). Draws nothing when
/// that probability is zero.
int apply_readout_flip(int outcome, int qubit, const NoiseModel &model, Rng &rng);

/// Multiplies every probability by the regime factor (1, 2, 4) and clips to
/// the hardware limits. The input is expected to be the low-regime model.
NoiseModel scale_regime(const NoiseModel &model, Regime regime);

/// Runs `circuit` on `initial`, sampling gate errors after every gate.
StateVector run_noisy_trajectory(StateVector initial, const Circuit &circuit,
                                 const NoiseModel &model, Rng &rng);

/**
 * Repeated noisy shots of one fixed circuit.
 *
 * Each call to `shot` draws gate errors with the same distribution as
 * `run_noisy_trajectory`, then samples one basis outcome. The next error
 * position is drawn by inverting the cumulative survival probability, so a
 * shot costs one uniform plus one per fired error instead of one per gate.
 * States after each ideal gate are cached, so a trajectory is only
 * re-simulated from its first fired error onward.
 */
class TrajectorySampler {
  public:
    TrajectorySampler(const StateVector &initial, const Circuit &circuit,
                      const NoiseModel &model);

    /// Basis index of one measured trajectory (before readout flips).
    std::size_t shot(Rng &rng);

    [[nodiscard]] const StateVector &ideal_final() const { return prefix_.back(); }

  private:
    struct Event {
        std::size_t gate;
        PauliError error;
    };

    Circuit circuit_;
    std::vector<double> eps_;
    std::vector<double> survival_; // survival_[i]: no error in gates [0, i)
    std::vector<StateVector> prefix_;
    StateVector work_;
    std::vector<double> ideal_cdf_;
    std::vector<Event> events_;
    bool gates_noiseless_;
};

/**
 * Parses a calibration file. Format, one entry per line:
 *
 *     # comment
 *     default_p1 = 0.005
 *     default_p2 = 0.025
 *     default_readout = 0.03
 *     p1 q0 = 0.004
 *     p2 q0 q1 = 0.02
 *     readout q3 = 0.03
 *
 * Qubits without an explicit entry use the defaults.
 */
NoiseModel parse_calibration(std::string_view text, const std::string &source = "<string>");
NoiseModel load_calibration(const std::filesystem::path &path);

std::string format_calibration(const NoiseModel &model);

} // namespace qfed
