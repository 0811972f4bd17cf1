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

#include "qctrlkit/optimizer.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "qctrlkit/parallel.hpp"
#include "qctrlkit/rng.hpp"

namespace qctrlkit {

Bounds::Bounds(RealVector lo, RealVector hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size()) throw ConfigError("bounds: length mismatch");
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
        if (lower[i] > upper[i]) throw ConfigError("bounds: lower > upper");
    }
}

Bounds Bounds::uniform(int n, double lo, double hi) {
    return Bounds(RealVector::Constant(n, lo), RealVector::Constant(n, hi));
}

RealVector Bounds::clamp(const RealVector& v) const {
    return v.cwiseMax(lower).cwiseMin(upper);
}

bool Bounds::finite() const { return lower.allFinite() && upper.allFinite(); }

namespace {

// Components of the projected gradient: zero where a bound is active and the
// gradient pushes outward.
RealVector projected_gradient(const RealVector& x, const RealVector& g, const Bounds& b) {
    RealVector pg = g;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const bool at_lower = x[i] <= b.lower[i] && g[i] > 0.0;
        const bool at_upper = x[i] >= b.upper[i] && g[i] < 0.0;
        if (at_lower || at_upper) pg[i] = 0.0;
    }
    return pg;
}

}  // namespace

DescentResult lbfgsb_descent(const graph::CostGraph& graph, const Bounds& bounds,
                             const RealVector& x0, const StopCriteria& stop, int memory) {
    const Eigen::Index n = x0.size();
    if (bounds.size() != n) throw ConfigError("lbfgsb_descent: bounds size mismatch");

    DescentResult result;
    RealVector x = bounds.clamp(x0);
    RealVector g(n);
    double f = graph.value_and_gradient(x, g);
    result.evaluations = 1;

    std::deque<std::pair<RealVector, RealVector>> history;  // (s, y) curvature pairs

    double best_f = f;
    RealVector best_x = x;

    for (int iter = 0; iter < stop.max_iterations; ++iter) {
        result.iterations = iter + 1;
        const RealVector pg = projected_gradient(x, g, bounds);
        if (pg.norm() <= stop.gradient_tolerance * (1.0 + std::abs(f))) break;

        // Two-loop L-BFGS recursion on the stored curvature pairs.
        RealVector d = -pg;
        if (!history.empty()) {
            std::vector<double> alpha(history.size());
            std::vector<double> rho(history.size());
            for (size_t k = history.size(); k-- > 0;) {
                const auto& [s, y] = history[k];
                rho[k] = 1.0 / y.dot(s);
                alpha[k] = rho[k] * s.dot(d);
                d -= alpha[k] * y;
            }
            const auto& [s_last, y_last] = history.back();
            d *= s_last.dot(y_last) / y_last.squaredNorm();
            for (size_t k = 0; k < history.size(); ++k) {
                const auto& [s, y] = history[k];
                const double beta = rho[k] * y.dot(d);
                d += (alpha[k] - beta) * s;
            }
        }
        if (!(d.dot(pg) < 0.0)) d = -pg;  // fall back to steepest descent

        // Armijo backtracking along the projection arc x(a) = clamp(x + a d).
        const double f_old = f;
        bool accepted = false;
        RealVector x_new(n), g_new(n);
        double f_new = f;
        auto line_search = [&](const RealVector& direction) {
            // Without curvature history the raw gradient sets no sensible
            // length scale; cap the first move at unit length.
            double step = history.empty()
                              ? std::min(1.0, 1.0 / std::max(1.0, direction.norm()))
                              : 1.0;
            for (int ls = 0; ls < 60; ++ls) {
                x_new = bounds.clamp(x + step * direction);
                const RealVector dx = x_new - x;
                if (dx.norm() == 0.0) return false;  // fully clamped
                f_new = graph.value_and_gradient(x_new, g_new);
                ++result.evaluations;
                const double predicted = g.dot(dx);
                if (std::isfinite(f_new) && f_new <= f + 1e-4 * std::min(predicted, 0.0)) {
                    return true;
                }
                step *= 0.5;
            }
            return false;
        };
        accepted = line_search(d);
        if (!accepted && history.size() > 0) {
            // The quasi-Newton direction can be blocked by active bounds;
            // the projected gradient never is (unless converged).
            history.clear();
            accepted = line_search(-pg);
        }
        if (!accepted) break;  // no acceptable step remains

        const RealVector s = x_new - x;
        const RealVector y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-10 * s.norm() * y.norm()) {
            history.emplace_back(s, y);
            if (static_cast<int>(history.size()) > memory) history.pop_front();
        }
        x = std::move(x_new);
        g = std::move(g_new);
        f = f_new;
        if (f < best_f) {
            best_f = f;
            best_x = x;
        }
        if (stop.cost_tolerance > 0.0 &&
            std::abs(f_old - f) <= stop.cost_tolerance * (1.0 + std::abs(f))) {
            break;
        }
    }

    result.x = std::move(best_x);
    result.cost = best_f;
    return result;
}

OptimizationResult minimize(const graph::CostGraph& graph, const Bounds& bounds,
                            const MinimizeOptions& options) {
    if (options.starts < 1) throw ConfigError("minimize: starts must be >= 1");

    OptimizationResult result;
    result.seed = options.seed;
    result.starts.resize(static_cast<size_t>(options.starts));

    std::vector<RealVector> xs(static_cast<size_t>(options.starts));
    std::vector<double> costs(static_cast<size_t>(options.starts),
                              std::numeric_limits<double>::infinity());

    parallel_for(options.starts, [&](int k) {
        StartRecord& record = result.starts[static_cast<size_t>(k)];
        record.start_index = k;
        try {
            const graph::CostGraph* g =
                options.graph_for_start ? options.graph_for_start(k) : &graph;
            RealVector x0;
            if (k < static_cast<int>(options.initial_points.size())) {
                x0 = options.initial_points[static_cast<size_t>(k)];
            } else {
                const Bounds& window =
                    options.initial_window.has_value() ? *options.initial_window : bounds;
                RngStream rng(options.seed, 0xb0u, static_cast<uint64_t>(k));
                x0.resize(bounds.size());
                for (Eigen::Index i = 0; i < x0.size(); ++i) {
                    const double lo = window.lower[i];
                    const double hi = window.upper[i];
                    if (std::isfinite(lo) && std::isfinite(hi)) {
                        x0[i] = rng.uniform(lo, hi);
                    } else if (std::isfinite(lo)) {
                        x0[i] = lo + rng.uniform();
                    } else if (std::isfinite(hi)) {
                        x0[i] = hi - rng.uniform();
                    } else {
                        x0[i] = rng.uniform(-1.0, 1.0);
                    }
                }
            }
            const DescentResult descent =
                lbfgsb_descent(*g, bounds, x0, options.stop, options.lbfgs_memory);
            xs[static_cast<size_t>(k)] = descent.x;
            costs[static_cast<size_t>(k)] = descent.cost;
            record.best_cost = descent.cost;
            record.iterations = descent.iterations;
            record.evaluations = descent.evaluations;
        } catch (const std::exception& e) {
            record.failed = true;
            record.failure = e.what();
        }
    });

    result.best_cost = std::numeric_limits<double>::infinity();
    for (int k = 0; k < options.starts; ++k) {
        result.total_evaluations += result.starts[static_cast<size_t>(k)].evaluations;
        if (result.starts[static_cast<size_t>(k)].failed) continue;
        if (costs[static_cast<size_t>(k)] < result.best_cost) {
            result.best_cost = costs[static_cast<size_t>(k)];
            result.best_variables = xs[static_cast<size_t>(k)];
            result.best_start = k;
        }
    }
    if (result.best_start < 0) {
        throw NumericError("minimize: every optimizer start failed");
    }
    return result;
}

}  // namespace qctrlkit
