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

#include <vector>

#include "qctrlkit/noise.hpp"
#include "qctrlkit/types.hpp"

namespace qctrlkit {

/// Traceless noise operators in the control (toggling) frame, sampled at m
/// uniform times spanning [0, tau]: N'_i = U^dag N_i U - Tr(P U^dag N_i U) /
/// Tr(P) * I, with the control propagator advanced after each sample.
struct TogglingFrameSeries {
    std::vector<Matrix> samples;
    double dt = 0.0;  // tau / (m - 1)
    Projector projector;
};

TogglingFrameSeries toggling_frame(const ControlSolution& ctrl,
                                   const OperatorSeries& noise_op, const Projector& p,
                                   int samples);

/// Trapezoid-weighted discrete-time Fourier transform of the sampled series
/// evaluated with the e^{+i omega t} kernel (the -omega convention of the
/// continuous transform), G(omega) = integral dt e^{+i omega t} N'(t).
std::vector<Matrix> dtft(const TogglingFrameSeries& series,
                         const std::vector<double>& frequencies);

struct FilterFunctionResult {
    std::vector<double> frequencies;
    std::vector<double> values;
    std::string channel;
};

/// Default sample count: max(1000, 10 x segment count).
int default_ff_samples(const ControlSolution& ctrl);

/// Leading-order filter function
///   F(omega) = (1/Tr P) sum_l p_l sum_q |[G(omega)]_{lq}|^2.
FilterFunctionResult filter_function(const ControlSolution& ctrl,
                                     const OperatorSeries& noise_op, const Projector& p,
                                     const std::vector<double>& frequencies,
                                     int samples = 0);

/// Frequency-domain robustness infidelity for one channel given a one-sided
/// PSD: (1/2pi) integral_0^inf F(omega) S^(1)(omega) d omega by trapezoid,
/// equal to the symmetric two-sided overlap because F is even. The filter
/// function is interpolated linearly onto the PSD grid where needed.
double robust_infidelity_ff(const FilterFunctionResult& ff, const OneSidedPsd& psd);

/// Multi-channel sum of overlap integrals.
double robust_infidelity_ff(const std::vector<FilterFunctionResult>& ffs,
                            const std::vector<OneSidedPsd>& psds);

}  // namespace qctrlkit
