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

#include "qctrlkit/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/SVD>

#include "qctrlkit/filter_functions.hpp"
#include "qctrlkit/optimizer.hpp"

namespace qctrlkit {

namespace {
constexpr double kPi = std::numbers::pi;
}

FrequencyPartition::FrequencyPartition(std::vector<ChannelBand> bands)
    : channels(std::move(bands)) {
    if (channels.empty()) throw ConfigError("frequency partition must not be empty");
    for (const auto& band : channels) {
        if (band.samples < 2) throw ConfigError("frequency partition needs >= 2 samples");
        if (!(band.omega_max > band.omega_min) || band.omega_min < 0.0) {
            throw ConfigError("frequency partition needs omega_max > omega_min >= 0");
        }
    }
}

int FrequencyPartition::total_samples() const {
    int n = 0;
    for (const auto& band : channels) n += band.samples;
    return n;
}

MeasurementRecord::MeasurementRecord(RealVector i, RealVector di)
    : infidelities(std::move(i)), uncertainties(std::move(di)) {
    if (infidelities.size() != uncertainties.size()) {
        throw ConfigError("measurement record: length mismatch");
    }
    for (Eigen::Index k = 0; k < uncertainties.size(); ++k) {
        if (uncertainties[k] < 0.0) throw ConfigError("measurement uncertainties must be >= 0");
    }
}

MeasurementRecord::MeasurementRecord(RealVector i)
    : MeasurementRecord(RealVector(i), RealVector(RealVector::Zero(i.size()))) {}

RealVector ReconstructedPsd::channel_values(int k) const {
    int offset = 0;
    for (int c = 0; c < k; ++c) offset += partition.channels[static_cast<size_t>(c)].samples;
    return values.segment(offset, partition.channels[static_cast<size_t>(k)].samples);
}

SensitivityMatrix build_sensitivity(const std::vector<ControlSolution>& controls,
                                    const std::vector<OperatorSeries>& noise_ops,
                                    const FrequencyPartition& partition, const Projector& p,
                                    int samples) {
    if (controls.empty()) throw ConfigError("build_sensitivity: need at least one control");
    if (static_cast<int>(noise_ops.size()) != partition.channel_count()) {
        throw ConfigError("build_sensitivity: channel count mismatch");
    }
    const int c = static_cast<int>(controls.size());
    const int n = partition.total_samples();

    SensitivityMatrix out{RealMatrix::Zero(c, n), partition, {}};
    out.provenance.reserve(static_cast<size_t>(c));
    for (int j = 0; j < c; ++j) out.provenance.push_back("control-" + std::to_string(j));

    int col = 0;
    for (int k = 0; k < partition.channel_count(); ++k) {
        const ChannelBand& band = partition.channels[static_cast<size_t>(k)];
        std::vector<double> freqs(static_cast<size_t>(band.samples));
        for (int l = 0; l < band.samples; ++l) freqs[static_cast<size_t>(l)] = band.omega(l);
        const double scale = band.delta_omega() / (2.0 * kPi);
        for (int j = 0; j < c; ++j) {
            const FilterFunctionResult ff = filter_function(
                controls[static_cast<size_t>(j)], noise_ops[static_cast<size_t>(k)], p, freqs,
                samples);
            for (int l = 0; l < band.samples; ++l) {
                const double endpoint = (l == 0 || l == band.samples - 1) ? 0.5 : 1.0;
                out.values(j, col + l) = scale * endpoint * ff.values[static_cast<size_t>(l)];
            }
        }
        col += band.samples;
    }
    return out;
}

ReconstructedPsd reconstruct_svd(const SensitivityMatrix& f_hat,
                                 const MeasurementRecord& record, double cutoff) {
    if (record.infidelities.size() != f_hat.values.rows()) {
        throw ConfigError("reconstruct_svd: infidelity count mismatch");
    }
    Eigen::JacobiSVD<RealMatrix> svd(f_hat.values,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& sv = svd.singularValues();
    const double s_max = sv.size() > 0 ? sv[0] : 0.0;
    if (!(s_max > 0.0)) throw NumericError("reconstruct_svd: zero sensitivity matrix");

    RealVector inv = RealVector::Zero(sv.size());
    int kept = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > cutoff * s_max) {
            inv[i] = 1.0 / sv[i];
            ++kept;
        }
    }
    if (kept == 0) throw NumericError("reconstruct_svd: all singular values below cutoff");

    ReconstructedPsd out{RealVector(), f_hat.partition, ReconstructionMethod::Svd, {}, false};
    out.values = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() *
                 record.infidelities;
    return out;
}

namespace {

// Blockwise first-derivative matrix: one (s(k)-1) x s(k) difference block
// per channel, assembled into a (n - p) x n matrix.
RealMatrix difference_matrix(const FrequencyPartition& partition) {
    const int n = partition.total_samples();
    const int rows = n - partition.channel_count();
    RealMatrix d = RealMatrix::Zero(rows, n);
    int row = 0;
    int col = 0;
    for (const auto& band : partition.channels) {
        for (int l = 0; l + 1 < band.samples; ++l) {
            d(row, col + l) = -1.0;
            d(row, col + l + 1) = 1.0;
            ++row;
        }
        col += band.samples;
    }
    return d;
}

struct CoProblem {
    graph::CostGraph graph;
    Bounds bounds;
    std::vector<RealVector> initial_points;
    double psd_scale = 1.0;  // estimate = psd_scale * optimizer variables
};

// The optimizer sees the problem in normalized units (infidelities of order
// one, solution of order one) so its stopping rules behave regardless of the
// physical psd magnitude.
CoProblem build_co_problem(const SensitivityMatrix& f_hat, const MeasurementRecord& record,
                           const CoOptions& options, double lambda) {
    const int n = static_cast<int>(f_hat.values.cols());
    CoProblem problem{graph::CostGraph(n), Bounds(), {}, 1.0};

    const double i_scale =
        std::max(record.infidelities.cwiseAbs().maxCoeff(), 1e-300);
    const double f_scale = std::max(f_hat.values.cwiseAbs().maxCoeff(), 1e-300);
    const double s_scale = i_scale / f_scale;
    problem.psd_scale = s_scale;
    const double unit = s_scale / i_scale;  // F entries scale by this

    auto& g = problem.graph;
    const int all = g.add(graph::make_slice(0, n), {0});
    const int residual = g.add(graph::make_linear_map(unit * f_hat.values), {all});
    const int residual_sq = g.add(
        graph::make_sum_squares(RealVector(record.infidelities / i_scale),
                                RealVector::Ones(record.infidelities.size())),
        {residual});

    std::vector<int> cost_terms{residual_sq};
    std::vector<double> weights{1.0};

    if (options.tikhonov_weight > 0.0) {
        const RealMatrix d = difference_matrix(f_hat.partition);
        const int smooth = g.add(graph::make_linear_map(d), {all});
        const int smooth_sq =
            g.add(graph::make_sum_squares(RealVector::Zero(d.rows()),
                                          RealVector::Ones(d.rows())),
                  {smooth});
        cost_terms.push_back(smooth_sq);
        weights.push_back(lambda * options.tikhonov_weight * s_scale * s_scale /
                          (i_scale * i_scale));
    }
    if (options.l1_weight > 0.0) {
        const int l1 = g.add(graph::make_sum_entries(), {all});
        cost_terms.push_back(l1);
        weights.push_back(lambda * options.l1_weight * s_scale / (i_scale * i_scale));
    }
    RealVector w(static_cast<Eigen::Index>(weights.size()));
    for (size_t i = 0; i < weights.size(); ++i) w[static_cast<Eigen::Index>(i)] = weights[i];
    g.add(graph::make_weighted_sum(w), cost_terms);

    problem.bounds = Bounds(RealVector::Zero(n),
                            RealVector::Constant(n, std::numeric_limits<double>::infinity()));

    // Deterministic starts: clipped SVD estimate, a flat guess and zero.
    RealVector svd_start = RealVector::Zero(n);
    try {
        svd_start = reconstruct_svd(f_hat, record).values.cwiseMax(0.0) / s_scale;
    } catch (const NumericError&) {
        // keep zero start
    }
    problem.initial_points.push_back(svd_start);
    problem.initial_points.push_back(RealVector::Constant(n, 1.0 / n));
    problem.initial_points.push_back(RealVector::Zero(n));
    return problem;
}

RealVector solve_co(const SensitivityMatrix& f_hat, const MeasurementRecord& record,
                    const CoOptions& options, double lambda) {
    CoProblem problem = build_co_problem(f_hat, record, options, lambda);
    MinimizeOptions mopts;
    mopts.starts = static_cast<int>(problem.initial_points.size());
    mopts.initial_points = problem.initial_points;
    mopts.stop.max_iterations = options.max_iterations;
    mopts.stop.gradient_tolerance = 1e-10;
    const OptimizationResult result = minimize(problem.graph, problem.bounds, mopts);
    return problem.psd_scale * result.best_variables;
}

}  // namespace

HyperparameterChoice find_hyperparameter(const SensitivityMatrix& f_hat,
                                         const MeasurementRecord& record,
                                         const CoOptions& options) {
    const int grid = std::max(1, options.lambda_grid);
    Eigen::JacobiSVD<RealMatrix> svd(f_hat.values);
    const double s_max = svd.singularValues()[0];
    const double lambda_ref = s_max * s_max;

    std::vector<double> lambdas(static_cast<size_t>(grid));
    if (grid == 1) {
        lambdas[0] = lambda_ref;
        return HyperparameterChoice{lambdas[0], false};
    }
    const double lo = std::log10(lambda_ref) - 8.0;
    const double hi = std::log10(lambda_ref) + 2.0;
    for (int i = 0; i < grid; ++i) {
        lambdas[static_cast<size_t>(i)] = std::pow(10.0, lo + (hi - lo) * i / (grid - 1));
    }

    const RealMatrix d = difference_matrix(f_hat.partition);
    std::vector<double> log_rho(static_cast<size_t>(grid));
    std::vector<double> log_eta(static_cast<size_t>(grid));
    for (int i = 0; i < grid; ++i) {
        const RealVector s = solve_co(f_hat, record, options, lambdas[static_cast<size_t>(i)]);
        const double rho = (f_hat.values * s - record.infidelities).norm();
        double eta = 0.0;
        if (options.tikhonov_weight > 0.0) {
            eta += options.tikhonov_weight * (d * s).squaredNorm();
        }
        if (options.l1_weight > 0.0) eta += options.l1_weight * s.sum();
        log_rho[static_cast<size_t>(i)] = std::log10(std::max(rho, 1e-300));
        log_eta[static_cast<size_t>(i)] = std::log10(std::max(eta, 1e-300));
    }

    const double rho_span =
        *std::max_element(log_rho.begin(), log_rho.end()) -
        *std::min_element(log_rho.begin(), log_rho.end());
    const double eta_span =
        *std::max_element(log_eta.begin(), log_eta.end()) -
        *std::min_element(log_eta.begin(), log_eta.end());
    if (rho_span < 1e-9 || eta_span < 1e-9) {
        return HyperparameterChoice{lambdas[static_cast<size_t>(grid / 2)], true};
    }

    // Maximum-curvature knee via central differences on the index parameter.
    double best_kappa = -std::numeric_limits<double>::infinity();
    int best = grid / 2;
    for (int i = 1; i + 1 < grid; ++i) {
        const double xp = 0.5 * (log_rho[static_cast<size_t>(i) + 1] -
                                 log_rho[static_cast<size_t>(i) - 1]);
        const double yp = 0.5 * (log_eta[static_cast<size_t>(i) + 1] -
                                 log_eta[static_cast<size_t>(i) - 1]);
        const double xpp = log_rho[static_cast<size_t>(i) + 1] -
                           2.0 * log_rho[static_cast<size_t>(i)] +
                           log_rho[static_cast<size_t>(i) - 1];
        const double ypp = log_eta[static_cast<size_t>(i) + 1] -
                           2.0 * log_eta[static_cast<size_t>(i)] +
                           log_eta[static_cast<size_t>(i) - 1];
        const double denom = std::pow(xp * xp + yp * yp, 1.5);
        if (denom <= 0.0) continue;
        const double kappa = std::abs(xp * ypp - yp * xpp) / denom;
        if (kappa > best_kappa) {
            best_kappa = kappa;
            best = i;
        }
    }
    return HyperparameterChoice{lambdas[static_cast<size_t>(best)], false};
}

ReconstructedPsd reconstruct_co(const SensitivityMatrix& f_hat,
                                const MeasurementRecord& record, const CoOptions& options) {
    if (record.infidelities.size() != f_hat.values.rows()) {
        throw ConfigError("reconstruct_co: infidelity count mismatch");
    }
    if (options.tikhonov_weight <= 0.0 && options.l1_weight <= 0.0) {
        throw ConfigError("reconstruct_co: at least one regularizer weight must be positive");
    }

    ReconstructedPsd out{RealVector(), f_hat.partition,
                         ReconstructionMethod::ConvexOptimization, {}, false};
    double lambda;
    if (options.lambda.has_value()) {
        if (*options.lambda < 0.0) throw ConfigError("reconstruct_co: lambda must be >= 0");
        lambda = *options.lambda;
    } else {
        const HyperparameterChoice choice = find_hyperparameter(f_hat, record, options);
        lambda = choice.lambda;
        out.degenerate_l_curve = choice.degenerate;
    }
    out.lambda = lambda;
    out.values = solve_co(f_hat, record, options, lambda);
    return out;
}

ReconstructedPsd splice(const std::vector<ReconstructedPsd>& parts) {
    if (parts.empty()) throw ConfigError("splice: no reconstructions given");
    if (parts.size() == 1) return parts.front();

    for (const auto& part : parts) {
        if (part.partition.channel_count() != 1) {
            throw ConfigError("splice: parts must each cover a single channel");
        }
    }
    const double d_omega = parts.front().partition.channels[0].delta_omega();
    for (const auto& part : parts) {
        if (std::abs(part.partition.channels[0].delta_omega() - d_omega) > 1e-9 * d_omega) {
            throw ConfigError("splice: sub-domains must share the frequency resolution");
        }
    }

    double omega_lo = std::numeric_limits<double>::infinity();
    double omega_hi = -std::numeric_limits<double>::infinity();
    for (const auto& part : parts) {
        omega_lo = std::min(omega_lo, part.partition.channels[0].omega_min);
        omega_hi = std::max(omega_hi, part.partition.channels[0].omega_max);
    }
    const int n = static_cast<int>(std::lround((omega_hi - omega_lo) / d_omega)) + 1;

    RealVector acc = RealVector::Zero(n);
    RealVector count = RealVector::Zero(n);
    for (const auto& part : parts) {
        const ChannelBand& band = part.partition.channels[0];
        for (int l = 0; l < band.samples; ++l) {
            const double pos = (band.omega(l) - omega_lo) / d_omega;
            const int idx = static_cast<int>(std::lround(pos));
            if (idx < 0 || idx >= n || std::abs(pos - idx) > 1e-6) {
                throw ConfigError("splice: sub-domain grids are not aligned");
            }
            acc[idx] += part.values[l];
            count[idx] += 1.0;
        }
    }
    for (int i = 0; i < n; ++i) {
        if (count[i] == 0.0) throw ConfigError("splice: gap between sub-domains");
        acc[i] /= count[i];
    }

    ReconstructedPsd out{std::move(acc),
                         FrequencyPartition({ChannelBand{omega_lo, omega_hi, n}}),
                         parts.front().method,
                         {},
                         false};
    return out;
}

}  // namespace qctrlkit
