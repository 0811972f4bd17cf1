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

#include "qctrlkit/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "qctrlkit/control.hpp"
#include "qctrlkit/parallel.hpp"
#include "qctrlkit/rng.hpp"

namespace qctrlkit {

namespace {

// Merge tolerance for coincident boundaries, relative to the total duration.
constexpr double kBoundaryTol = 1e-12;

std::vector<double> merge_boundaries(const std::vector<std::vector<double>>& boundary_sets,
                                     double total) {
    std::vector<double> all;
    for (const auto& b : boundary_sets) all.insert(all.end(), b.begin(), b.end());
    std::sort(all.begin(), all.end());
    std::vector<double> merged;
    merged.push_back(0.0);
    for (double t : all) {
        if (t <= merged.back() + kBoundaryTol * total) continue;
        if (t >= total * (1.0 - kBoundaryTol)) break;
        merged.push_back(t);
    }
    merged.push_back(total);
    return merged;
}

}  // namespace

JointGrid joint_segments(const std::vector<Segmentation>& series) {
    if (series.empty()) throw ConfigError("joint_segments: no input series");
    const double total = series.front().total();
    std::vector<std::vector<double>> boundary_sets;
    boundary_sets.reserve(series.size());
    for (const auto& s : series) {
        if (std::abs(s.total() - total) > 1e-9 * total) {
            throw ConfigError("joint_segments: total durations do not match");
        }
        boundary_sets.push_back(s.boundaries());
    }

    const std::vector<double> merged = merge_boundaries(boundary_sets, total);
    std::vector<double> durations(merged.size() - 1);
    for (size_t i = 0; i + 1 < merged.size(); ++i) durations[i] = merged[i + 1] - merged[i];

    JointGrid grid{Segmentation(std::move(durations)), {}};
    grid.source_map.resize(series.size());
    for (size_t s = 0; s < series.size(); ++s) {
        grid.source_map[s].resize(merged.size() - 1);
        for (size_t i = 0; i + 1 < merged.size(); ++i) {
            const double mid = 0.5 * (merged[i] + merged[i + 1]);
            grid.source_map[s][i] = series[s].segment_at(std::min(mid, total));
        }
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Noise channels
// ---------------------------------------------------------------------------

NoiseChannel NoiseChannel::additive(OperatorSeries n, OneSidedPsd psd) {
    NoiseChannel c;
    c.coupling = NoiseCoupling::Additive;
    c.op = std::move(n);
    c.source = std::move(psd);
    return c;
}

NoiseChannel NoiseChannel::additive(OperatorSeries n, NoiseTimeSeries series) {
    NoiseChannel c;
    c.coupling = NoiseCoupling::Additive;
    c.op = std::move(n);
    c.source = std::move(series);
    return c;
}

NoiseChannel NoiseChannel::on_drive_modulus(int drive_index, OneSidedPsd psd) {
    NoiseChannel c;
    c.coupling = NoiseCoupling::DriveModulus;
    c.target_index = drive_index;
    c.source = std::move(psd);
    return c;
}

NoiseChannel NoiseChannel::on_drive_modulus(int drive_index, NoiseTimeSeries series) {
    NoiseChannel c;
    c.coupling = NoiseCoupling::DriveModulus;
    c.target_index = drive_index;
    c.source = std::move(series);
    return c;
}

NoiseChannel NoiseChannel::on_shift(int shift_index, OneSidedPsd psd) {
    NoiseChannel c;
    c.coupling = NoiseCoupling::Shift;
    c.target_index = shift_index;
    c.source = std::move(psd);
    return c;
}

NoiseChannel NoiseChannel::on_shift(int shift_index, NoiseTimeSeries series) {
    NoiseChannel c;
    c.coupling = NoiseCoupling::Shift;
    c.target_index = shift_index;
    c.source = std::move(series);
    return c;
}

namespace {

void validate_channel(const NoiseChannel& channel, const ControlSolution& ctrl) {
    switch (channel.coupling) {
        case NoiseCoupling::Additive:
            if (!channel.op.has_value()) {
                throw ConfigError("additive noise channel requires an operator");
            }
            if (channel.op->dimension() != ctrl.dimension) {
                throw ConfigError("noise operator dimension mismatch");
            }
            break;
        case NoiseCoupling::DriveModulus:
            if (channel.target_index < 0 ||
                channel.target_index >= static_cast<int>(ctrl.drives.size())) {
                throw ConfigError("noise channel references missing drive");
            }
            break;
        case NoiseCoupling::Shift:
            if (channel.target_index < 0 ||
                channel.target_index >= static_cast<int>(ctrl.shifts.size())) {
                throw ConfigError("noise channel references missing shift");
            }
            break;
    }
}

NoiseTimeSeries realize_series(const NoiseChannel& channel, uint64_t seed,
                               uint64_t channel_index, uint64_t trial, double tau) {
    if (std::holds_alternative<std::monostate>(channel.source)) {
        throw ConfigError("noise channel has no psd or series source");
    }
    if (const auto* psd = std::get_if<OneSidedPsd>(&channel.source)) {
        // One independent stream per (seed, channel, trial).
        RngStream key(seed, channel_index, trial);
        NoiseTimeSeries series = time_series(*psd, key.next_u64());
        if (series.period() < tau * (1.0 - 1e-9)) {
            throw ConfigError(
                "noise psd resolution too coarse: series period shorter than the control "
                "duration (need delta_omega <= 2 pi / tau)");
        }
        return series;
    }
    const auto& series = std::get<NoiseTimeSeries>(channel.source);
    if (series.period() < tau * (1.0 - 1e-9)) {
        throw ConfigError("explicit noise series shorter than the control duration");
    }
    return series;
}

// Cell-edge boundaries of a sampled series: {dt/2, 3dt/2, ...} clipped to
// (0, tau). Un-split cells then have the native sample time as midpoint, so
// resampling is exact there.
std::vector<double> series_cell_edges(const NoiseTimeSeries& series, double tau) {
    std::vector<double> edges;
    const int len = series.size();
    for (int k = 0; k + 1 < len; ++k) {
        const double edge = (k + 0.5) * series.dt;
        if (edge >= tau) break;
        edges.push_back(edge);
    }
    return edges;
}

}  // namespace

OperatorSeries realize_noisy_hamiltonian(const ControlSolution& ctrl,
                                         const std::vector<NoiseChannel>& channels,
                                         uint64_t seed, uint64_t trial) {
    for (const auto& c : channels) validate_channel(c, ctrl);
    if (channels.empty()) return assemble_hamiltonian(ctrl);

    const double tau = ctrl.duration;

    std::vector<NoiseTimeSeries> noise_series;
    noise_series.reserve(channels.size());
    for (size_t k = 0; k < channels.size(); ++k) {
        noise_series.push_back(realize_series(channels[k], seed, k, trial, tau));
    }

    // Joint grid: control boundaries plus the sampling cells of every noise
    // series.
    std::vector<std::vector<double>> boundary_sets;
    std::vector<Segmentation> control_grids;
    for (const auto& d : ctrl.drives) control_grids.push_back(d.pulse.segmentation);
    for (const auto& s : ctrl.shifts) control_grids.push_back(s.pulse.segmentation);
    for (const auto& g : control_grids) boundary_sets.push_back(g.boundaries());
    if (boundary_sets.empty()) boundary_sets.push_back({0.0, tau});
    for (const auto& series : noise_series) {
        boundary_sets.push_back(series_cell_edges(series, tau));
    }
    const std::vector<double> merged = merge_boundaries(boundary_sets, tau);

    const int n = static_cast<int>(merged.size()) - 1;
    std::vector<double> durations(static_cast<size_t>(n));
    std::vector<double> midpoints(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        durations[static_cast<size_t>(i)] = merged[i + 1] - merged[i];
        midpoints[static_cast<size_t>(i)] = 0.5 * (merged[i] + merged[i + 1]);
    }
    Segmentation grid(durations);

    // Noise values per channel on the grid (Whittaker-Shannon resampling).
    std::vector<RealVector> noise_values(channels.size(), RealVector::Zero(n));
    for (size_t k = 0; k < channels.size(); ++k) {
        for (int i = 0; i < n; ++i) {
            noise_values[k][i] = shannon_interpolate_periodic(noise_series[k], midpoints[i]);
        }
    }

    std::vector<Matrix> ops(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = midpoints[static_cast<size_t>(i)];
        Matrix h = ctrl.drift;
        for (size_t j = 0; j < ctrl.drives.size(); ++j) {
            Complex g = ctrl.drives[j].pulse.at(t);
            for (size_t k = 0; k < channels.size(); ++k) {
                if (channels[k].coupling == NoiseCoupling::DriveModulus &&
                    channels[k].target_index == static_cast<int>(j)) {
                    const PolarValue pv = polar_from_complex(g);
                    g = complex_from_polar(pv.modulus + noise_values[k][i], pv.phase);
                }
            }
            h += g * ctrl.drives[j].op + std::conj(g) * ctrl.drives[j].op.adjoint();
        }
        for (size_t l = 0; l < ctrl.shifts.size(); ++l) {
            double alpha = ctrl.shifts[l].pulse.at(t);
            for (size_t k = 0; k < channels.size(); ++k) {
                if (channels[k].coupling == NoiseCoupling::Shift &&
                    channels[k].target_index == static_cast<int>(l)) {
                    alpha += noise_values[k][i];
                }
            }
            h += alpha * ctrl.shifts[l].op;
        }
        for (size_t k = 0; k < channels.size(); ++k) {
            if (channels[k].coupling == NoiseCoupling::Additive) {
                h += noise_values[k][i] * channels[k].op->at(t);
            }
        }
        ops[static_cast<size_t>(i)] = std::move(h);
    }
    return OperatorSeries(std::move(ops), grid);
}

// ---------------------------------------------------------------------------
// Propagation
// ---------------------------------------------------------------------------

std::vector<Matrix> unitary_evolution(const OperatorSeries& hamiltonian,
                                      const std::vector<double>& times) {
    const double tau = hamiltonian.segmentation.total();
    for (size_t i = 0; i < times.size(); ++i) {
        if (times[i] < -1e-12 * tau || times[i] > tau * (1.0 + 1e-12)) {
            throw ConfigError("unitary_evolution: time outside [0, tau]");
        }
        if (i > 0 && times[i] < times[i - 1]) {
            throw ConfigError("unitary_evolution: times must be sorted");
        }
    }

    const int dim = hamiltonian.dimension();
    const std::vector<double> bounds = hamiltonian.segmentation.boundaries();
    const int n_seg = hamiltonian.segmentation.count();

    std::vector<Matrix> out;
    out.reserve(times.size());

    Matrix accumulated = Matrix::Identity(dim, dim);
    int seg = 0;
    // Eigendecomposition of the current segment, built on demand.
    bool have_eig = false;
    Eigen::SelfAdjointEigenSolver<Matrix> es;

    auto segment_exp = [&](int s, double dt) -> Matrix {
        if (!have_eig) {
            require_hermitian(hamiltonian.ops[static_cast<size_t>(s)], 1e-9, "hamiltonian segment");
            es.compute(hamiltonian.ops[static_cast<size_t>(s)]);
            if (es.info() != Eigen::Success) {
                throw NumericError("unitary_evolution: eigendecomposition failed");
            }
            have_eig = true;
        }
        Vector phases(dim);
        for (int k = 0; k < dim; ++k) phases[k] = std::polar(1.0, -es.eigenvalues()[k] * dt);
        return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    };

    for (double t : times) {
        t = std::clamp(t, 0.0, tau);
        while (seg < n_seg - 1 && t > bounds[static_cast<size_t>(seg) + 1] + 1e-15 * tau) {
            accumulated = segment_exp(seg, hamiltonian.segmentation.duration(seg)) * accumulated;
            ++seg;
            have_eig = false;
        }
        const double dt = t - bounds[static_cast<size_t>(seg)];
        if (dt <= 0.0) {
            out.push_back(accumulated);
        } else {
            out.push_back(segment_exp(seg, dt) * accumulated);
        }
    }
    return out;
}

std::vector<Vector> propagate_state(const std::vector<Matrix>& u_series, const Vector& psi0) {
    if (std::abs(psi0.norm() - 1.0) > 1e-9) {
        throw ConfigError("propagate_state: initial state must be normalized");
    }
    std::vector<Vector> out;
    out.reserve(u_series.size());
    for (const Matrix& u : u_series) out.push_back(u * psi0);
    return out;
}

EnsembleDensityMatrix ensemble_density(const std::vector<Vector>& states) {
    if (states.empty()) throw ConfigError("ensemble_density: need at least one state");
    const auto dim = states.front().size();
    Matrix rho = Matrix::Zero(dim, dim);
    for (const Vector& psi : states) {
        if (psi.size() != dim) throw ConfigError("ensemble_density: dimension mismatch");
        rho += psi * psi.adjoint();
    }
    rho /= static_cast<double>(states.size());
    return EnsembleDensityMatrix{std::move(rho), static_cast<int>(states.size())};
}

// ---------------------------------------------------------------------------
// Monte Carlo metrics
// ---------------------------------------------------------------------------

FidelityValue robust_infidelity_mc(const ControlSolution& ctrl,
                                   const std::vector<NoiseChannel>& channels,
                                   const Projector& p, int trials, uint64_t seed) {
    if (trials < 1) throw ConfigError("robust_infidelity_mc: trials must be >= 1");
    if (p.dimension() != ctrl.dimension) {
        throw ConfigError("robust_infidelity_mc: projector dimension mismatch");
    }

    const OperatorSeries ideal = assemble_hamiltonian(ctrl);
    const Matrix u_ctrl = unitary_evolution(ideal, {ctrl.duration}).front();

    std::vector<double> fidelity(static_cast<size_t>(trials), 0.0);
    parallel_for(trials, [&](int m) {
        const OperatorSeries noisy =
            realize_noisy_hamiltonian(ctrl, channels, seed, static_cast<uint64_t>(m));
        const Matrix u_tot = unitary_evolution(noisy, {ctrl.duration}).front();
        const Matrix u_noise = u_tot * u_ctrl.adjoint();
        Complex overlap = 0.0;
        for (int l = 0; l < p.dimension(); ++l) {
            if (p.entry(l)) overlap += u_noise(l, l);
        }
        fidelity[static_cast<size_t>(m)] = std::norm(overlap / static_cast<double>(p.trace()));
    });

    double mean = 0.0;
    for (double f : fidelity) mean += f;
    mean /= trials;
    double var = 0.0;
    for (double f : fidelity) var += (f - mean) * (f - mean);
    var = trials > 1 ? var / (trials - 1.0) : 0.0;

    FidelityValue out;
    out.kind = FidelityKind::Robust;
    out.value = std::clamp(1.0 - mean, 0.0, 1.0);
    out.standard_error = std::sqrt(var / trials);
    return out;
}

SimulationResult simulate_ensemble(const ControlSolution& ctrl,
                                   const std::vector<NoiseChannel>& channels,
                                   const Vector& psi0, const std::vector<double>& times,
                                   int trials, uint64_t seed) {
    if (trials < 1) throw ConfigError("simulate_ensemble: trials must be >= 1");
    const int dim = ctrl.dimension;
    const int n_times = static_cast<int>(times.size());

    std::vector<RealMatrix> populations(static_cast<size_t>(trials));
    std::vector<Vector> final_states(static_cast<size_t>(trials));

    parallel_for(trials, [&](int m) {
        const OperatorSeries noisy =
            realize_noisy_hamiltonian(ctrl, channels, seed, static_cast<uint64_t>(m));
        const std::vector<Matrix> u = unitary_evolution(noisy, times);
        const std::vector<Vector> psi = propagate_state(u, psi0);
        RealMatrix pops(n_times, dim);
        for (int i = 0; i < n_times; ++i) {
            for (int d = 0; d < dim; ++d) pops(i, d) = std::norm(psi[static_cast<size_t>(i)][d]);
        }
        populations[static_cast<size_t>(m)] = std::move(pops);
        const std::vector<Matrix> u_final = unitary_evolution(noisy, {ctrl.duration});
        final_states[static_cast<size_t>(m)] = u_final.front() * psi0;
    });

    SimulationResult result;
    result.times = times;
    result.mean_populations = RealMatrix::Zero(n_times, dim);
    for (const auto& pops : populations) result.mean_populations += pops;
    result.mean_populations /= static_cast<double>(trials);
    result.final_density = ensemble_density(final_states);
    return result;
}

}  // namespace qctrlkit
