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

#include <optional>
#include <variant>
#include <vector>

#include "qctrlkit/noise.hpp"
#include "qctrlkit/types.hpp"

namespace qctrlkit {

/// Shared segmentation of several piecewise-constant series, with the map
/// from each joint segment back to the covering segment of every input.
struct JointGrid {
    Segmentation segmentation;
    // source_map[s][i] = index of the segment of input series s covering
    // joint segment i.
    std::vector<std::vector<int>> source_map;

    int source_segment(int series, int joint_segment) const {
        return source_map[static_cast<size_t>(series)][static_cast<size_t>(joint_segment)];
    }
};

/// Union of the boundary sets of all inputs. All inputs must share the
/// total duration within 1e-9 relative.
JointGrid joint_segments(const std::vector<Segmentation>& series);

/// How a noise channel couples into the system.
enum class NoiseCoupling {
    Additive,         // beta(t) N added to the Hamiltonian
    DriveModulus,     // delta(t) added to the modulus of drive[index]
    Shift,            // delta(t) added to the pulse of shift[index]
};

/// One stochastic noise channel: an operator-valued generator (additive
/// channels) or a reference to a control term (multiplicative channels),
/// driven by a PSD or an explicit time series.
struct NoiseChannel {
    NoiseCoupling coupling = NoiseCoupling::Additive;
    int target_index = -1;                   // drive/shift index for multiplicative
    std::optional<OperatorSeries> op;        // additive generator N_k(t)
    std::variant<std::monostate, OneSidedPsd, NoiseTimeSeries> source;

    static NoiseChannel additive(OperatorSeries n, OneSidedPsd psd);
    static NoiseChannel additive(OperatorSeries n, NoiseTimeSeries series);
    static NoiseChannel on_drive_modulus(int drive_index, OneSidedPsd psd);
    static NoiseChannel on_drive_modulus(int drive_index, NoiseTimeSeries series);
    static NoiseChannel on_shift(int shift_index, OneSidedPsd psd);
    static NoiseChannel on_shift(int shift_index, NoiseTimeSeries series);
};

/// One noisy realization of the total Hamiltonian on the joint grid of the
/// controls and all noise series. Multiplicative channels perturb the pulse
/// values, additive channels contribute beta_k(t) N_k. The RNG stream for
/// channel k of trial m is derived from (seed, k, m).
OperatorSeries realize_noisy_hamiltonian(const ControlSolution& ctrl,
                                         const std::vector<NoiseChannel>& channels,
                                         uint64_t seed, uint64_t trial = 0);

/// Time-evolution operators U(t, 0) at the requested (sorted) times, via
/// the per-segment matrix-exponential product with a partial exponential
/// for times interior to a segment.
std::vector<Matrix> unitary_evolution(const OperatorSeries& hamiltonian,
                                      const std::vector<double>& times);

/// |psi_t> = U_t |psi_0> for each supplied propagator.
std::vector<Vector> propagate_state(const std::vector<Matrix>& u_series, const Vector& psi0);

struct EnsembleDensityMatrix {
    Matrix rho;
    int trials = 0;
};

/// rho = (1/M) sum_m |psi^m><psi^m|.
EnsembleDensityMatrix ensemble_density(const std::vector<Vector>& states);

/// Monte Carlo robust infidelity: 1 - <|<P U_noise, I>_F / Tr(P)|^2> with
/// U_noise = U_tot U_ctrl^dagger per realization. Reproducible for a fixed
/// seed; trials run in parallel with per-trial derived seeds.
FidelityValue robust_infidelity_mc(const ControlSolution& ctrl,
                                   const std::vector<NoiseChannel>& channels,
                                   const Projector& p, int trials, uint64_t seed);

/// Ensemble-averaged populations and final density matrix for a simulated
/// noisy evolution; used by the CLI `simulate` command.
struct SimulationResult {
    std::vector<double> times;
    RealMatrix mean_populations;  // times x dimension
    EnsembleDensityMatrix final_density;
};

SimulationResult simulate_ensemble(const ControlSolution& ctrl,
                                   const std::vector<NoiseChannel>& channels,
                                   const Vector& psi0, const std::vector<double>& times,
                                   int trials, uint64_t seed);

}  // namespace qctrlkit
