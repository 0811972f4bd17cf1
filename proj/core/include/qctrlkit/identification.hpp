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
#include <vector>

#include "qctrlkit/optimizer.hpp"
#include "qctrlkit/types.hpp"

namespace qctrlkit {

/// One measurement configuration: the system evolves under
/// H(t, theta) = pulse(t) * (Q0 + sum_i theta_i Q_i) for `duration`, then
/// the Hermitian observable is measured in the prepared state.
struct ExperimentSpec {
    double duration = 0.0;
    Vector initial_state;
    Matrix observable;
    RealPwc pulse;                  // fixed modulation envelope
    std::vector<Matrix> parameter_ops;  // Q_i, one per parameter
    std::optional<Matrix> constant_op;  // Q0

    ExperimentSpec(double tau, Vector psi, Matrix obs, RealPwc envelope,
                   std::vector<Matrix> ops, std::optional<Matrix> q0 = std::nullopt);
};

struct DataPoint {
    double mean = 0.0;
    double std_dev = 0.0;  // must be > 0
};

struct EstimationResult {
    RealVector theta;
    RealMatrix covariance;       // inverse Fisher matrix (when invertible)
    RealVector error_bars;       // 2 sqrt(diag(covariance))
    bool covariance_available = false;
    double best_cost = 0.0;
    int starts = 0;
    uint64_t seed = 0;
};

/// Ideal expectation values Y_m(theta) for every experiment.
RealVector predicted_values(const RealVector& theta,
                            const std::vector<ExperimentSpec>& experiments);

/// Gaussian negative log-likelihood cost
///   C = sum_m [Y_m(theta) - y_m]^2 / (2 dy_m^2).
double likelihood_cost(const RealVector& theta, const std::vector<DataPoint>& data,
                       const std::vector<ExperimentSpec>& experiments);

/// Builds the differentiable likelihood graph used by identify(); exposed
/// for testing the gradient path. Optional per-parameter scales map
/// normalized optimizer variables u to theta = u * scale, keeping the
/// descent well conditioned for rad/s-sized parameters.
graph::CostGraph likelihood_graph(const std::vector<ExperimentSpec>& experiments,
                                  const std::vector<DataPoint>& data,
                                  const RealVector& scales = RealVector());

/// Hessian of the cost at theta by central finite differences with one
/// Richardson refinement, symmetrized. The relative step is per coordinate.
RealMatrix fisher_information(const std::vector<ExperimentSpec>& experiments,
                              const std::vector<DataPoint>& data, const RealVector& theta,
                              double relative_step = 1e-4);

struct IdentifyOptions {
    int starts = 30;
    uint64_t seed = 0;
    StopCriteria stop{/*max_iterations=*/2000, /*gradient_tolerance=*/1e-9,
                      /*cost_tolerance=*/1e-14};
};

/// Maximum-likelihood estimate across seeded random starts within bounds;
/// covariance from the inverse Fisher matrix, error bars as 2 sigma.
EstimationResult identify(const std::vector<ExperimentSpec>& experiments,
                          const std::vector<DataPoint>& data, const Bounds& bounds,
                          const IdentifyOptions& options);

/// Synthetic Gaussian measurement generator for reproduction studies:
/// y_m = Y_m(theta_true) + N(0, sigma), seeded.
std::vector<DataPoint> synthesize_data(const RealVector& theta_true,
                                       const std::vector<ExperimentSpec>& experiments,
                                       double sigma, uint64_t seed);

}  // namespace qctrlkit
