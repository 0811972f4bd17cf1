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
#include <string>
#include <vector>

#include "qctrlkit/types.hpp"

namespace qctrlkit {

/// Frequency sampling domain per noise channel.
struct ChannelBand {
    double omega_min = 0.0;
    double omega_max = 0.0;
    int samples = 0;

    double delta_omega() const { return (omega_max - omega_min) / (samples - 1); }
    double omega(int l) const { return omega_min + l * delta_omega(); }
};

struct FrequencyPartition {
    std::vector<ChannelBand> channels;

    explicit FrequencyPartition(std::vector<ChannelBand> bands);
    int channel_count() const { return static_cast<int>(channels.size()); }
    int total_samples() const;
};

/// Trapezoid-weighted stack of filter-function samples: row j holds the
/// sensitivity of control j's infidelity to the discretized PSD, so that
/// F_hat * S approximates the overlap integrals.
struct SensitivityMatrix {
    RealMatrix values;  // c x n
    FrequencyPartition partition;
    std::vector<std::string> provenance;  // which control produced each row
};

struct MeasurementRecord {
    RealVector infidelities;
    RealVector uncertainties;  // stored, not propagated

    MeasurementRecord(RealVector i, RealVector di);
    explicit MeasurementRecord(RealVector i);
};

enum class ReconstructionMethod { Svd, ConvexOptimization };

struct ReconstructedPsd {
    RealVector values;  // length n, concatenated per channel
    FrequencyPartition partition;
    ReconstructionMethod method = ReconstructionMethod::Svd;
    std::optional<double> lambda;  // hyperparameter when method == CO
    bool degenerate_l_curve = false;

    /// Per-channel slice of the stacked estimate.
    RealVector channel_values(int k) const;
};

/// Builds the c x n sensitivity matrix from filter functions of the given
/// controls against each channel's noise operator, scaled by
/// delta_omega / 2 pi with the trapezoid endpoint halving.
SensitivityMatrix build_sensitivity(const std::vector<ControlSolution>& controls,
                                    const std::vector<OperatorSeries>& noise_ops,
                                    const FrequencyPartition& partition, const Projector& p,
                                    int samples = 0);

/// Pseudo-inverse estimate S = V D+ U^dag I; singular values below
/// cutoff * s_max are zeroed.
ReconstructedPsd reconstruct_svd(const SensitivityMatrix& f_hat,
                                 const MeasurementRecord& record, double cutoff = 1e-8);

struct CoOptions {
    double tikhonov_weight = 1.0;  // w_T on |D S|^2, D blockwise per channel
    double l1_weight = 0.0;        // w_1 on sum(S) over S >= 0
    std::optional<double> lambda;  // fixed hyperparameter; absent = L-curve
    int lambda_grid = 20;
    int max_iterations = 2000;
};

/// Positivity-constrained regularized estimate via the optimizer module:
/// min |F S - I|^2 + lambda (w_T |D S|^2 + w_1 sum S) s.t. S >= 0.
ReconstructedPsd reconstruct_co(const SensitivityMatrix& f_hat,
                                const MeasurementRecord& record,
                                const CoOptions& options = {});

/// L-curve criterion: lambda at maximum curvature of the log-log
/// (residual norm, regularizer norm) curve over a logarithmic grid.
struct HyperparameterChoice {
    double lambda = 0.0;
    bool degenerate = false;  // flat curve; mid-grid fallback used
};
HyperparameterChoice find_hyperparameter(const SensitivityMatrix& f_hat,
                                         const MeasurementRecord& record,
                                         const CoOptions& options = {});

/// Concatenates reconstructions over contiguous or overlapping frequency
/// sub-domains of a single channel; overlapping bins are averaged.
ReconstructedPsd splice(const std::vector<ReconstructedPsd>& parts);

}  // namespace qctrlkit
