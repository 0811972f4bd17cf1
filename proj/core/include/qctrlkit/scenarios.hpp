// Copyright 2026 The qctrlkit Authors
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

#pragma once

#include <array>
#include <string>
#include <vector>

#include "qctrlkit/identification.hpp"
#include "qctrlkit/noise.hpp"
#include "qctrlkit/simulator.hpp"
#include "qctrlkit/types.hpp"

namespace qctrlkit::scenarios {

// ---------------------------------------------------------------------------
// Pulsed dynamical decoupling
// ---------------------------------------------------------------------------

/// Carr-Purcell-Meiboom-Gill sequence: n pi rotations about sigma_x centred
/// at t_j = tau (j - 1/2) / n, each a constant-amplitude segment of the
/// given width with pulse area exactly pi. n = 0 is free evolution.
ControlSolution cpmg_sequence(int order, double duration, double pulse_width);

/// Dephasing probe operator sigma_z / 2 for the qubit sequences above.
OperatorSeries dephasing_probe(double duration);

// ---------------------------------------------------------------------------
// Anharmonic qutrit with DRAG drive (leakage + dephasing)
// ---------------------------------------------------------------------------

struct DragQutritConfig {
    double anharmonicity = -2.0 * 3.14159265358979323846 * 300e6;  // eta, rad/s
    double duration = 20e-9;                                       // s
    double gaussian_sigma_fraction = 0.15;  // sigma = fraction * duration
    double drag_weight = 0.5;               // Q = -weight * dI/dt / eta
    // Peak of the Gaussian-squared detuning shift. With auto_detuning the
    // peak is set to 4 A^2 / eta (A the calibrated drive peak), cancelling
    // the Stark shift of the qubit transition; an explicit value overrides.
    bool auto_detuning = true;
    double detuning_amplitude = 0.0;
    double amplitude = 0.0;  // peak of I(t); 0 = auto-calibrate
    int segments = 128;
};

struct DragQutritScenario {
    ControlSolution control;
    Matrix dephasing_op;  // sigma_z embedded as diag(1, -1, 0)
    int drive_index = 0;
    int detuning_shift_index = 0;
    double calibrated_amplitude = 0.0;
};

/// Discretized Gaussian Half-DRAG X_pi pulse. When config.amplitude == 0 the
/// peak amplitude is calibrated by a one-dimensional sweep maximizing the
/// |0> -> |1> transfer.
DragQutritScenario drag_qutrit(const DragQutritConfig& config);

/// Fig.-5-style noise channels for the DRAG scenario (drive phase noise is
/// applied by pulse rewriting, see apply_drive_phase_noise).
std::vector<NoiseChannel> drag_noise_channels(const DragQutritScenario& scenario,
                                              const OneSidedPsd& detuning_psd,
                                              const OneSidedPsd& dephasing_psd);

/// Rewrites the drive phase phi(t) -> phi(t) + beta(t) on the joint grid of
/// the pulse and the noise series.
ControlSolution apply_drive_phase_noise(const ControlSolution& ctrl, int drive_index,
                                        const NoiseTimeSeries& beta);

// ---------------------------------------------------------------------------
// Parametrically driven iSWAP subspace
// ---------------------------------------------------------------------------

struct IswapConfig {
    double coupling_g = 2.0 * 3.14159265358979323846 * 5e6;  // g, rad/s
    double modulation_amplitude = 0.0;                       // omega_T tilde, rad/s
    double modulation_frequency = 0.0;                       // omega_p, rad/s
    double lambda_max = 2.0 * 3.14159265358979323846 * 1e6;  // drive bound, rad/s
};

struct IswapSystem {
    Matrix coupling_op;     // (1/2)|10><01| on the (|00>,|10>,|01>,|11>) basis
    Matrix qubit_drive_op;  // (1/2)|0><1| (x) I on the fixed qubit
    Matrix noise_op;        // diag(-1, 1, -1, 1) / 2
    double lambda_max = 0.0;
};

IswapSystem iswap_system(const IswapConfig& config);

/// Parametric coupling rate Lambda = 2 g J1(modulation_amplitude / 2 omega_p).
double iswap_coupling_rate(double g, double modulation_amplitude,
                           double modulation_frequency);

/// Constant-pulse control template with integral(Lambda) dt = pi (full
/// |10> <-> |01> transfer) over the given duration.
ControlSolution iswap_pi_control(const IswapSystem& system, double duration, double xi,
                                 int segments = 1);

// ---------------------------------------------------------------------------
// Two-qubit dephasing probe circuits
// ---------------------------------------------------------------------------

struct TwoQubitProbe {
    std::vector<Matrix> gates;  // ideal gate unitaries in time order
    ControlSolution control;    // one PWC segment of duration t_gate per gate
    Matrix noise_op;            // (Z_a - Z_b) / 2
    int idle_before_swap = 0;   // i
    int idle_between_swaps = 0; // j
};

/// Bell-state echo circuit: U_E, i idles, SW, j idles, SW, (50 - i - j)
/// idles, U_E^dag, with every gate one segment of duration t_gate. Requires
/// 16 + i + j <= total_gates.
TwoQubitProbe two_qubit_probe(int idle_before_swap, int idle_between_swaps,
                              double t_gate = 110e-9, int total_gates = 66);

/// Hermitian generator H = i log(U) / t_gate (principal branch).
Matrix gate_generator(const Matrix& unitary, double t_gate);

// ---------------------------------------------------------------------------
// Declarative optimization problems (emitted as problem JSON documents)
// ---------------------------------------------------------------------------

/// Crosstalk-aware circuit compilation over 5 qutrits: m free-evolution
/// periods under the always-on coupling, interleaved with m+1 products of k
/// instantaneous local control unitaries.
struct CrosstalkConfig {
    std::array<std::array<double, 4>, 4> couplings;  // alpha[pair][ab], rad/s
    int free_periods = 8;   // m
    int gate_factors = 2;   // k
    double tau_max = 1.5e-6;
    double penalty_weight = 0.0;  // 0 = default 100 / tau_max^2
    int lbfgs_max_iterations = 600;

    static CrosstalkConfig defaults();
};

/// Declarative problem document (see problem_io.hpp for the schema).
std::string crosstalk_problem_json(const CrosstalkConfig& config);

/// Same structure restricted to a single free-evolution period sandwiched
/// by local gates (the uncompensated compilation baseline).
std::string crosstalk_baseline_json(const CrosstalkConfig& config);

/// Diagonal of the 3^5-dimensional coupling Hamiltonian.
RealVector crosstalk_zz_diagonal(const CrosstalkConfig& config);
/// Diagonal of the target U_Cphi (x) U_Cphi (x) I.
Vector crosstalk_target_diagonal();

/// Benchmark (a): four-qubit space, three-axis control of the first qubit,
/// Hadamard target.
struct HadamardBenchConfig {
    int segments = 64;
    double duration = 0.5;
    double pulse_bound = 2.0 * 3.14159265358979323846 * 2.0;  // rad/s
    double dephasing_drift = 2.0 * 3.14159265358979323846 * 1.0;
};
std::string hadamard_four_qubit_problem_json(const HadamardBenchConfig& config);

/// Benchmark (b): linear Rydberg array with global coupling and detuning,
/// GHZ preparation target.
struct RydbergConfig {
    int atoms = 4;
    int segments = 40;
    double duration = 1.1e-6;
    double rabi_bound = 2.0 * 3.14159265358979323846 * 5e6;
    double detuning_bound = 2.0 * 3.14159265358979323846 * 20e6;
    double interaction = 2.0 * 3.14159265358979323846 * 24e6;
    double edge_detuning = -2.0 * 3.14159265358979323846 * 4.5e6;
};
std::string rydberg_ghz_problem_json(const RydbergConfig& config);

/// Rydberg Hamiltonian pieces for direct checks.
Matrix rydberg_drift(const RydbergConfig& config);
Vector rydberg_ghz_state(int atoms);

// ---------------------------------------------------------------------------
// Three-axis constant-Hamiltonian identification setup
// ---------------------------------------------------------------------------

struct ThreeAxisConfig {
    int points_per_preparation = 20;
    double max_wait = 1e-6;  // wait-time grid spans [0, max_wait]
};

/// Preparations in the sigma_x, sigma_y, sigma_z eigenbases measured in
/// sigma_z, sigma_x, sigma_y respectively, at uniformly spaced wait times.
/// Parameters are the three Pauli rates of H = (1/2) sum_i Omega_i sigma_i.
std::vector<ExperimentSpec> three_axis_experiments(const ThreeAxisConfig& config);

/// Nyquist-derived parameter bounds |Omega_i| <= pi / dt for the wait-time
/// grid spacing dt.
Bounds three_axis_bounds(const ThreeAxisConfig& config);

}  // namespace qctrlkit::scenarios
