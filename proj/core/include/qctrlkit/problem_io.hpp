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

#include <map>
#include <optional>
#include <string>

#include "qctrlkit/graph.hpp"
#include "qctrlkit/optimizer.hpp"

namespace qctrlkit {

/// A declaratively specified optimization problem: variables with bounds, a
/// node list forming the cost graph, stop criteria and a default start
/// count. See the README for the JSON schema.
struct GraphProblem {
    graph::CostGraph graph;
    Bounds bounds;
    StopCriteria stop;
    std::optional<Bounds> initial_window;
    int default_starts = 1;
    std::map<std::string, double> metadata_numbers;
    std::map<std::string, int> node_labels;  // named diagnostic nodes

    GraphProblem() : graph(1) {}
};

GraphProblem problem_from_json_text(const std::string& text);
GraphProblem problem_from_json_file(const std::string& path);

}  // namespace qctrlkit
