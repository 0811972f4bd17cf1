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

#include "qctrlkit/filter_functions.hpp"

#include <algorithm>
#include <cmath>

#include "qctrlkit/control.hpp"

namespace qctrlkit {

TogglingFrameSeries toggling_frame(const ControlSolution& ctrl,
                                   const OperatorSeries& noise_op, const Projector& p,
                                   int samples) {
    if (samples < 2) throw ConfigError("toggling_frame: need at least 2 samples");
    if (noise_op.dimension() != ctrl.dimension || p.dimension() != ctrl.dimension) {
        throw ConfigError("toggling_frame: dimension mismatch");
    }

    const OperatorSeries h_ctrl = assemble_hamiltonian(ctrl);
    const double tau = ctrl.duration;
    const double dt = tau / (samples - 1);
    const double trace_p = static_cast<double>(p.trace());
    const int dim = ctrl.dimension;

    TogglingFrameSeries out{{}, dt, p};
    out.samples.reserve(static_cast<size_t>(samples));

    Matrix u = Matrix::Identity(dim, dim);
    for (int i = 0; i < samples; ++i) {
        const double t = std::min(i * dt, tau);
        const Matrix& n_t = noise_op.at(t);
        Matrix toggled = u.adjoint() * n_t * u;
        Complex tr = 0.0;
        for (int l = 0; l < dim; ++l) {
            if (p.entry(l)) tr += toggled(l, l);
        }
        toggled -= (tr / trace_p) * Matrix::Identity(dim, dim);
        out.samples.push_back(std::move(toggled));
        // Advance the control propagator after recording the sample.
        if (i + 1 < samples) {
            u = matrix_exp_unitary(h_ctrl.at(t), dt) * u;
        }
    }
    return out;
}

std::vector<Matrix> dtft(const TogglingFrameSeries& series,
                         const std::vector<double>& frequencies) {
    const int m = static_cast<int>(series.samples.size());
    if (m < 2) throw ConfigError("dtft: need at least 2 samples");
    const auto dim = series.samples.front().rows();

    std::vector<Matrix> out;
    out.reserve(frequencies.size());
    for (double omega : frequencies) {
        if (!std::isfinite(omega)) throw ConfigError("dtft: frequencies must be finite");
        Matrix g = Matrix::Zero(dim, dim);
        for (int i = 0; i < m; ++i) {
            const double t = i * series.dt;
            // Trapezoid weights: the endpoint samples carry half weight.
            const double w = (i == 0 || i == m - 1) ? 0.5 : 1.0;
            g += (w * std::polar(1.0, omega * t)) * series.samples[static_cast<size_t>(i)];
        }
        out.push_back(series.dt * g);
    }
    return out;
}

int default_ff_samples(const ControlSolution& ctrl) {
    int segments = 1;
    for (const auto& d : ctrl.drives) segments = std::max(segments, d.pulse.segmentation.count());
    for (const auto& s : ctrl.shifts) segments = std::max(segments, s.pulse.segmentation.count());
    return std::max(1000, 10 * segments);
}

FilterFunctionResult filter_function(const ControlSolution& ctrl,
                                     const OperatorSeries& noise_op, const Projector& p,
                                     const std::vector<double>& frequencies, int samples) {
    if (samples <= 0) samples = default_ff_samples(ctrl);
    const TogglingFrameSeries toggled = toggling_frame(ctrl, noise_op, p, samples);
    const std::vector<Matrix> g = dtft(toggled, frequencies);

    FilterFunctionResult out;
    out.frequencies = frequencies;
    out.values.reserve(frequencies.size());
    const double trace_p = static_cast<double>(p.trace());
    const int dim = p.dimension();
    for (const Matrix& gk : g) {
        double f = 0.0;
        for (int l = 0; l < dim; ++l) {
            if (!p.entry(l)) continue;
            for (int q = 0; q < dim; ++q) f += std::norm(gk(l, q));
        }
        out.values.push_back(f / trace_p);
    }
    return out;
}

double robust_infidelity_ff(const FilterFunctionResult& ff, const OneSidedPsd& psd) {
    const int n_ff = static_cast<int>(ff.frequencies.size());
    if (n_ff < 2) throw ConfigError("robust_infidelity_ff: need at least 2 filter samples");
    for (int i = 1; i < n_ff; ++i) {
        if (ff.frequencies[i] <= ff.frequencies[i - 1]) {
            throw ConfigError("robust_infidelity_ff: filter grid must be increasing");
        }
    }

    // Linear interpolation of F onto the PSD grid; the PSD grid must lie
    // inside the filter grid's span.
    auto f_at = [&](double omega) -> double {
        if (omega < ff.frequencies.front() - 1e-9 * ff.frequencies.back() ||
            omega > ff.frequencies.back() * (1.0 + 1e-9)) {
            throw ConfigError("robust_infidelity_ff: psd grid outside filter grid");
        }
        const auto it = std::upper_bound(ff.frequencies.begin(), ff.frequencies.end(), omega);
        size_t hi = static_cast<size_t>(std::distance(ff.frequencies.begin(), it));
        if (hi == 0) hi = 1;
        if (hi >= ff.frequencies.size()) hi = ff.frequencies.size() - 1;
        const size_t lo = hi - 1;
        const double w =
            (omega - ff.frequencies[lo]) / (ff.frequencies[hi] - ff.frequencies[lo]);
        return (1.0 - w) * ff.values[lo] + w * ff.values[hi];
    };

    // (1/2pi) integral_0^{omega_max} F S^(1) d omega by trapezoid.
    double acc = 0.0;
    const int n = psd.size();
    for (int k = 0; k < n; ++k) {
        const double omega = k * psd.delta_omega;
        const double w = (k == 0 || k == n - 1) ? 0.5 : 1.0;
        acc += w * f_at(omega) * psd.samples[k];
    }
    return acc * psd.delta_omega / (2.0 * std::numbers::pi);
}

double robust_infidelity_ff(const std::vector<FilterFunctionResult>& ffs,
                            const std::vector<OneSidedPsd>& psds) {
    if (ffs.size() != psds.size()) {
        throw ConfigError("robust_infidelity_ff: channel count mismatch");
    }
    double acc = 0.0;
    for (size_t k = 0; k < ffs.size(); ++k) acc += robust_infidelity_ff(ffs[k], psds[k]);
    return acc;
}

}  // namespace qctrlkit
