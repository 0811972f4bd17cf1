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

#include <cstdint>
#include <vector>

#include "qctrlkit/types.hpp"

namespace qctrlkit {

/// One-sided power spectral density, sampled at omega_k = k * delta_omega
/// for k = 0..N-1 (angular frequency, rad/s).
struct OneSidedPsd {
    RealVector samples;
    double delta_omega = 0.0;

    OneSidedPsd(RealVector s, double d_omega);
    int size() const { return static_cast<int>(samples.size()); }
    double omega_max() const { return delta_omega * (size() - 1); }
    /// Wiener-Khinchin zero-lag integral (1/2pi) sum_k S_k delta_omega.
    double variance() const;
};

/// Real noise realization on a uniform time grid, tagged with the RNG key
/// that generated it.
struct NoiseTimeSeries {
    RealVector samples;
    double dt = 0.0;
    uint64_t seed = 0;

    NoiseTimeSeries(RealVector s, double step, uint64_t key = 0);
    int size() const { return static_cast<int>(samples.size()); }
    double span() const { return dt * (size() - 1); }
    double period() const { return dt * size(); }
};

/// Two-sided spectrum of length 2N-1: S_0 unchanged, interior samples
/// halved, upper half mirrored.
RealVector two_sided(const OneSidedPsd& psd);

/// Random amplitude spectrum X_k = e^{i phi_k} sqrt(S^(2)_k) with Hermitian
/// symmetry (phi_0 = 0, phi_k uniform on (-pi, pi), mirrored negated).
Vector random_spectrum(const OneSidedPsd& psd, uint64_t seed);

/// Real time series via the normalized inverse DFT of random_spectrum.
/// Normalization sqrt(delta_omega / 2 pi) makes the ensemble mean power of
/// each sample equal the zero-lag autocorrelation (1/2pi) sum_k S_k d_omega.
/// The grid step is dt = 2 pi / ((2N-1) delta_omega).
NoiseTimeSeries time_series(const OneSidedPsd& psd, uint64_t seed);

/// Whittaker-Shannon interpolation with periodic extension (a fixed number
/// of copies each side of the base window). Exact at the original grid.
/// Requested times must lie within [0, (L-1) dt].
std::vector<double> shannon_interpolate(const NoiseTimeSeries& series,
                                        const std::vector<double>& times,
                                        int extension_copies = 3);

/// Single-point interpolation with periodic wrapping of t; used when
/// resampling onto simulation grids longer than the base window.
double shannon_interpolate_periodic(const NoiseTimeSeries& series, double t,
                                    int extension_copies = 3);

/// One-sided periodogram estimate of the PSD of a series; the round-trip
/// validation oracle for time_series. The estimate is |X(omega)|^2 / T_obs
/// with X the windowed Fourier transform dt * DFT and T_obs the series
/// period, folded to one-sided.
OneSidedPsd periodogram(const NoiseTimeSeries& series);

}  // namespace qctrlkit
