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

#include "qctrlkit/noise.hpp"

#include <cmath>
#include <numbers>

#include "qctrlkit/fft.hpp"
#include "qctrlkit/rng.hpp"

namespace qctrlkit {

namespace {
constexpr double kPi = std::numbers::pi;

double sinc(double z) {
    if (std::abs(z) < 1e-12) return 1.0;
    const double pz = kPi * z;
    return std::sin(pz) / pz;
}
}  // namespace

OneSidedPsd::OneSidedPsd(RealVector s, double d_omega)
    : samples(std::move(s)), delta_omega(d_omega) {
    if (samples.size() < 2) throw ConfigError("one-sided psd needs at least 2 samples");
    if (!(delta_omega > 0.0)) throw ConfigError("psd resolution must be positive");
    for (Eigen::Index k = 0; k < samples.size(); ++k) {
        if (samples[k] < 0.0 || !std::isfinite(samples[k])) {
            throw ConfigError("psd samples must be nonnegative and finite");
        }
    }
}

double OneSidedPsd::variance() const {
    return samples.sum() * delta_omega / (2.0 * kPi);
}

NoiseTimeSeries::NoiseTimeSeries(RealVector s, double step, uint64_t key)
    : samples(std::move(s)), dt(step), seed(key) {
    if (samples.size() < 1) throw ConfigError("time series must not be empty");
    if (!(dt > 0.0)) throw ConfigError("time series requires dt > 0");
}

RealVector two_sided(const OneSidedPsd& psd) {
    const int n = psd.size();
    RealVector out(2 * n - 1);
    out[0] = psd.samples[0];
    for (int k = 1; k < n; ++k) {
        out[k] = 0.5 * psd.samples[k];
        out[2 * n - 1 - k] = 0.5 * psd.samples[k];
    }
    return out;
}

Vector random_spectrum(const OneSidedPsd& psd, uint64_t seed) {
    const RealVector s2 = two_sided(psd);
    const int len = static_cast<int>(s2.size());
    const int n = psd.size();
    RngStream rng(seed);
    Vector x(len);
    x[0] = std::sqrt(s2[0]);
    for (int k = 1; k < n; ++k) {
        const double phi = rng.uniform(-kPi, kPi);
        x[k] = std::polar(std::sqrt(s2[k]), phi);
        x[len - k] = std::conj(x[k]);
    }
    return x;
}

NoiseTimeSeries time_series(const OneSidedPsd& psd, uint64_t seed) {
    const Vector spectrum = random_spectrum(psd, seed);
    const int len = static_cast<int>(spectrum.size());
    const Vector raw = dft_backward(spectrum);

    // The overall constant is fixed by the Wiener-Khinchin zero-lag identity:
    // with sqrt(delta_omega / 2 pi) the ensemble mean power of each sample
    // equals (1/2pi) sum_k S^(1)_k delta_omega.
    const double scale = std::sqrt(psd.delta_omega / (2.0 * kPi));

    double max_abs = 0.0;
    double max_imag = 0.0;
    for (int j = 0; j < len; ++j) {
        max_abs = std::max(max_abs, std::abs(raw[j]));
        max_imag = std::max(max_imag, std::abs(raw[j].imag()));
    }
    if (max_abs > 0.0 && max_imag > 1e-9 * max_abs) {
        throw NumericError("time_series: imaginary residue above tolerance");
    }

    RealVector out(len);
    for (int j = 0; j < len; ++j) out[j] = scale * raw[j].real();
    const double dt = 2.0 * kPi / (len * psd.delta_omega);
    return NoiseTimeSeries(std::move(out), dt, seed);
}

double shannon_interpolate_periodic(const NoiseTimeSeries& series, double t,
                                    int extension_copies) {
    const int len = series.size();
    const double period = series.period();
    // Reduce t into the base window, then sum over nearby periodic copies.
    double tr = std::fmod(t, period);
    if (tr < 0.0) tr += period;
    double acc = 0.0;
    for (int copy = -extension_copies; copy <= extension_copies; ++copy) {
        const double offset = copy * period;
        for (int k = 0; k < len; ++k) {
            acc += series.samples[k] * sinc((tr - offset - k * series.dt) / series.dt);
        }
    }
    return acc;
}

std::vector<double> shannon_interpolate(const NoiseTimeSeries& series,
                                        const std::vector<double>& times,
                                        int extension_copies) {
    const double span = series.span();
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) {
        if (t < -1e-12 * span || t > span * (1.0 + 1e-12)) {
            throw ConfigError("shannon_interpolate: time outside supported domain");
        }
        out.push_back(shannon_interpolate_periodic(series, t, extension_copies));
    }
    return out;
}

OneSidedPsd periodogram(const NoiseTimeSeries& series) {
    const int len = series.size();
    if (len < 2) throw ConfigError("periodogram needs at least 2 samples");
    Vector x(len);
    for (int j = 0; j < len; ++j) x[j] = series.samples[j];
    const Vector spectrum = dft_forward(x);

    // Windowed Fourier transform X(omega_q) = dt * DFT_q over one period.
    const double t_obs = series.period();
    const double delta_omega = 2.0 * kPi / t_obs;

    RealVector two(len);
    for (int q = 0; q < len; ++q) {
        const double xw = std::norm(spectrum[q]) * series.dt * series.dt;
        two[q] = xw / t_obs;
    }

    // Fold to one-sided (inverse of two_sided): S^(1)_0 = S^(2)_0,
    // S^(1)_k = S^(2)_k + S^(2)_{L-k}.
    const int n = (len + 1) / 2;
    RealVector one(n);
    one[0] = two[0];
    for (int k = 1; k < n; ++k) {
        one[k] = two[k] + ((len - k) != k ? two[len - k] : 0.0);
    }
    return OneSidedPsd(std::move(one), delta_omega);
}

}  // namespace qctrlkit
