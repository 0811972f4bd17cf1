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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qctrlkit/graph.hpp"
#include "qctrlkit/types.hpp"

namespace qctrlkit {

/// Box constraints; entries may be -inf / +inf.
struct Bounds {
    RealVector lower;
    RealVector upper;

    Bounds() = default;
    Bounds(RealVector lo, RealVector hi);
    static Bounds uniform(int n, double lo, double hi);
    int size() const { return static_cast<int>(lower.size()); }
    RealVector clamp(const RealVector& v) const;
    bool finite() const;
};

struct StopCriteria {
    int max_iterations = 10000;
    double gradient_tolerance = 1e-5;
    double cost_tolerance = 0.0;  // relative decrease threshold; 0 disables
};

struct StartRecord {
    int start_index = 0;
    double best_cost = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool failed = false;
    std::string failure;
};

struct OptimizationResult {
    RealVector best_variables;
    double best_cost = 0.0;
    int best_start = -1;
    uint64_t seed = 0;
    std::vector<StartRecord> starts;
    int total_evaluations = 0;
};

struct MinimizeOptions {
    int starts = 1;
    uint64_t seed = 0;
    StopCriteria stop;
    int lbfgs_memory = 10;
    /// Explicit initial points; starts beyond the list are sampled
    /// uniformly within the (finite) bounds.
    std::vector<RealVector> initial_points;
    /// Optional narrower sampling window for random starts (defaults to the
    /// bounds); useful when the interesting basin is a small corner of the
    /// feasible box.
    std::optional<Bounds> initial_window;
    /// Optional per-start graph factory (e.g. randomized CRAB bases).
    /// When unset all starts share `graph`.
    std::function<const graph::CostGraph*(int)> graph_for_start;
};

/// Single bounded quasi-Newton descent (projected-gradient L-BFGS with
/// Armijo backtracking along the projection arc) from a given point.
struct DescentResult {
    RealVector x;
    double cost = 0.0;
    int iterations = 0;
    int evaluations = 0;
};

DescentResult lbfgsb_descent(const graph::CostGraph& graph, const Bounds& bounds,
                             const RealVector& x0, const StopCriteria& stop,
                             int memory = 10);

/// Multi-start bounded minimization of a cost graph. Deterministic for a
/// fixed seed; starts run in parallel and merge by start index.
OptimizationResult minimize(const graph::CostGraph& graph, const Bounds& bounds,
                            const MinimizeOptions& options);

}  // namespace qctrlkit
