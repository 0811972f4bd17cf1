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

#include "qctrlkit/identification.hpp"

#include <cmath>

#include "qctrlkit/control.hpp"
#include "qctrlkit/rng.hpp"
#include "qctrlkit/simulator.hpp"

namespace qctrlkit {

ExperimentSpec::ExperimentSpec(double tau, Vector psi, Matrix obs, RealPwc envelope,
                               std::vector<Matrix> ops, std::optional<Matrix> q0)
    : duration(tau),
      initial_state(std::move(psi)),
      observable(std::move(obs)),
      pulse(std::move(envelope)),
      parameter_ops(std::move(ops)),
      constant_op(std::move(q0)) {
    if (!(duration > 0.0)) throw ConfigError("experiment duration must be positive");
    if (std::abs(initial_state.norm() - 1.0) > 1e-9) {
        throw ConfigError("experiment initial state must be normalized");
    }
    require_hermitian(observable, 1e-12, "experiment observable");
    for (const Matrix& q : parameter_ops) {
        require_hermitian(q, 1e-12, "parameter operator");
        if (q.rows() != observable.rows()) throw ConfigError("parameter operator dimension");
    }
    if (constant_op.has_value()) require_hermitian(*constant_op, 1e-12, "constant operator");
    if (std::abs(pulse.segmentation.total() - duration) > 1e-9 * duration) {
        throw ConfigError("experiment pulse duration mismatch");
    }
}

namespace {

Matrix experiment_operator(const ExperimentSpec& exp, const RealVector& theta) {
    Matrix q = exp.constant_op.has_value()
                   ? *exp.constant_op
                   : Matrix::Zero(exp.observable.rows(), exp.observable.cols()).eval();
    for (size_t i = 0; i < exp.parameter_ops.size(); ++i) {
        q += theta[static_cast<Eigen::Index>(i)] * exp.parameter_ops[i];
    }
    return q;
}

}  // namespace

RealVector predicted_values(const RealVector& theta,
                            const std::vector<ExperimentSpec>& experiments) {
    RealVector y(static_cast<Eigen::Index>(experiments.size()));
    for (size_t m = 0; m < experiments.size(); ++m) {
        const ExperimentSpec& exp = experiments[m];
        if (theta.size() != static_cast<Eigen::Index>(exp.parameter_ops.size())) {
            throw ConfigError("predicted_values: parameter count mismatch");
        }
        const Matrix q = experiment_operator(exp, theta);
        std::vector<Matrix> ops;
        ops.reserve(static_cast<size_t>(exp.pulse.segmentation.count()));
        for (int s = 0; s < exp.pulse.segmentation.count(); ++s) {
            ops.push_back(exp.pulse.values[s] * q);
        }
        const OperatorSeries h(std::move(ops), exp.pulse.segmentation);
        const Matrix u = unitary_evolution(h, {exp.duration}).front();
        const Vector psi = u * exp.initial_state;
        y[static_cast<Eigen::Index>(m)] = std::real(psi.dot(exp.observable * psi));
    }
    return y;
}

double likelihood_cost(const RealVector& theta, const std::vector<DataPoint>& data,
                       const std::vector<ExperimentSpec>& experiments) {
    if (data.size() != experiments.size()) {
        throw ConfigError("likelihood_cost: data length must equal experiment count");
    }
    const RealVector y = predicted_values(theta, experiments);
    double cost = 0.0;
    for (size_t m = 0; m < data.size(); ++m) {
        if (!(data[m].std_dev > 0.0)) throw ConfigError("likelihood_cost: zero uncertainty");
        const double r = y[static_cast<Eigen::Index>(m)] - data[m].mean;
        cost += r * r / (2.0 * data[m].std_dev * data[m].std_dev);
    }
    return cost;
}

graph::CostGraph likelihood_graph(const std::vector<ExperimentSpec>& experiments,
                                  const std::vector<DataPoint>& data,
                                  const RealVector& scales) {
    if (data.size() != experiments.size()) {
        throw ConfigError("likelihood_graph: data length must equal experiment count");
    }
    if (experiments.empty()) throw ConfigError("likelihood_graph: no experiments");
    const int n_params = static_cast<int>(experiments.front().parameter_ops.size());
    if (scales.size() != 0 && scales.size() != n_params) {
        throw ConfigError("likelihood_graph: scale count mismatch");
    }

    graph::CostGraph g(n_params);
    std::vector<int> predictions;
    predictions.reserve(experiments.size());

    for (const ExperimentSpec& exp : experiments) {
        if (static_cast<int>(exp.parameter_ops.size()) != n_params) {
            throw ConfigError("likelihood_graph: inconsistent parameter counts");
        }
        const int segs = exp.pulse.segmentation.count();
        RealVector durations(segs);
        for (int s = 0; s < segs; ++s) durations[s] = exp.pulse.segmentation.duration(s);

        std::vector<int> terms;
        for (int i = 0; i < n_params; ++i) {
            int slot = g.add(graph::make_slice(i, 1), {0});
            if (scales.size() != 0 && scales[i] != 1.0) {
                slot = g.add(graph::make_affine(scales[i], 0.0), {slot});
            }
            const int scaled = g.add(graph::make_scaled_pwc(exp.pulse.values), {slot});
            terms.push_back(g.add(
                graph::make_shift_series(exp.parameter_ops[static_cast<size_t>(i)], durations),
                {scaled}));
        }
        if (exp.constant_op.has_value()) {
            graph::Series drift;
            drift.durations = durations;
            for (int s = 0; s < segs; ++s) {
                drift.ops.push_back(exp.pulse.values[s] * (*exp.constant_op));
            }
            terms.push_back(g.add(graph::make_const_series(std::move(drift)), {}));
        }
        const int h = g.add(graph::make_sum_series(), terms);
        const int u = g.add(graph::make_unitary(), {h});
        predictions.push_back(
            g.add(graph::make_expectation(exp.initial_state, exp.observable), {u}));
    }

    const int stacked = g.add(graph::make_concat(), predictions);
    RealVector targets(static_cast<Eigen::Index>(data.size()));
    RealVector weights(static_cast<Eigen::Index>(data.size()));
    for (size_t m = 0; m < data.size(); ++m) {
        if (!(data[m].std_dev > 0.0)) throw ConfigError("likelihood_graph: zero uncertainty");
        targets[static_cast<Eigen::Index>(m)] = data[m].mean;
        weights[static_cast<Eigen::Index>(m)] =
            1.0 / (2.0 * data[m].std_dev * data[m].std_dev);
    }
    g.add(graph::make_sum_squares(std::move(targets), std::move(weights)), {stacked});
    return g;
}

RealMatrix fisher_information(const std::vector<ExperimentSpec>& experiments,
                              const std::vector<DataPoint>& data, const RealVector& theta,
                              double relative_step) {
    const int n = static_cast<int>(theta.size());
    auto cost = [&](const RealVector& t) { return likelihood_cost(t, data, experiments); };

    auto hessian_with_step = [&](double rel) {
        RealMatrix h(n, n);
        RealVector steps(n);
        for (int i = 0; i < n; ++i) {
            steps[i] = rel * std::max(std::abs(theta[i]), 1.0);
        }
        const double f0 = cost(theta);
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                RealVector t = theta;
                if (i == j) {
                    t[i] = theta[i] + steps[i];
                    const double fp = cost(t);
                    t[i] = theta[i] - steps[i];
                    const double fm = cost(t);
                    h(i, i) = (fp - 2.0 * f0 + fm) / (steps[i] * steps[i]);
                } else {
                    t = theta;
                    t[i] += steps[i];
                    t[j] += steps[j];
                    const double fpp = cost(t);
                    t = theta;
                    t[i] += steps[i];
                    t[j] -= steps[j];
                    const double fpm = cost(t);
                    t = theta;
                    t[i] -= steps[i];
                    t[j] += steps[j];
                    const double fmp = cost(t);
                    t = theta;
                    t[i] -= steps[i];
                    t[j] -= steps[j];
                    const double fmm = cost(t);
                    h(i, j) = (fpp - fpm - fmp + fmm) / (4.0 * steps[i] * steps[j]);
                    h(j, i) = h(i, j);
                }
            }
        }
        return h;
    };

    // One Richardson refinement: H ~ (4 H(h/2) - H(h)) / 3.
    const RealMatrix coarse = hessian_with_step(relative_step);
    const RealMatrix fine = hessian_with_step(0.5 * relative_step);
    RealMatrix h = (4.0 * fine - coarse) / 3.0;
    h = 0.5 * (h + h.transpose()).eval();
    return h;
}

EstimationResult identify(const std::vector<ExperimentSpec>& experiments,
                          const std::vector<DataPoint>& data, const Bounds& bounds,
                          const IdentifyOptions& options) {
    if (options.starts < 1) throw ConfigError("identify: starts must be >= 1");

    // Optimize in normalized units u = theta / scale so the stopping rules
    // behave for physically sized (rad/s) parameters.
    const int n_params = static_cast<int>(bounds.size());
    RealVector scales(n_params);
    for (int i = 0; i < n_params; ++i) {
        scales[i] = std::max(std::max(std::abs(bounds.lower[i]), std::abs(bounds.upper[i])),
                             1e-300);
    }
    const graph::CostGraph g = likelihood_graph(experiments, data, scales);
    const Bounds scaled_bounds(RealVector(bounds.lower.cwiseQuotient(scales)),
                               RealVector(bounds.upper.cwiseQuotient(scales)));

    MinimizeOptions mopts;
    mopts.starts = options.starts;
    mopts.seed = options.seed;
    mopts.stop = options.stop;
    const OptimizationResult opt = minimize(g, scaled_bounds, mopts);

    EstimationResult result;
    result.theta = opt.best_variables.cwiseProduct(scales);
    result.best_cost = opt.best_cost;
    result.starts = options.starts;
    result.seed = options.seed;

    const RealMatrix fisher = fisher_information(experiments, data, result.theta);
    Eigen::FullPivLU<RealMatrix> lu(fisher);
    if (lu.isInvertible()) {
        result.covariance = lu.inverse();
        result.covariance = 0.5 * (result.covariance + result.covariance.transpose()).eval();
        result.error_bars.resize(result.theta.size());
        bool ok = true;
        for (Eigen::Index i = 0; i < result.theta.size(); ++i) {
            const double var = result.covariance(i, i);
            if (var < 0.0) ok = false;
            result.error_bars[i] = 2.0 * std::sqrt(std::max(var, 0.0));
        }
        result.covariance_available = ok;
    } else {
        result.covariance_available = false;
    }
    return result;
}

std::vector<DataPoint> synthesize_data(const RealVector& theta_true,
                                       const std::vector<ExperimentSpec>& experiments,
                                       double sigma, uint64_t seed) {
    if (!(sigma > 0.0)) throw ConfigError("synthesize_data: sigma must be positive");
    const RealVector y = predicted_values(theta_true, experiments);
    RngStream rng(seed, 0x5d17au);
    std::vector<DataPoint> data(experiments.size());
    for (size_t m = 0; m < data.size(); ++m) {
        data[m].mean = y[static_cast<Eigen::Index>(m)] + sigma * rng.normal();
        data[m].std_dev = sigma;
    }
    return data;
}

}  // namespace qctrlkit
