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

#include <string>
#include <vector>

#include "qctrlkit/identification.hpp"
#include "qctrlkit/noise.hpp"
#include "qctrlkit/reconstruction.hpp"
#include "qctrlkit/simulator.hpp"
#include "qctrlkit/types.hpp"

namespace qctrlkit {

/// Control solutions as JSON documents. Complex numbers are always
/// two-element [re, im] arrays.
std::string control_to_json(const ControlSolution& ctrl);
ControlSolution control_from_json_text(const std::string& text);
ControlSolution control_from_json_file(const std::string& path);

/// Noise channel lists; PSDs and series may be inline or CSV file
/// references resolved relative to `base_dir`.
std::vector<NoiseChannel> channels_from_json_text(const std::string& text,
                                                  const std::string& base_dir = ".");
std::vector<NoiseChannel> channels_from_json_file(const std::string& path);

/// One noise operator, constant ({"operator": ...}) or piecewise-constant
/// ({"operators": [...], "durations": [...]}).
OperatorSeries operator_series_from_json_file(const std::string& path, double duration);
Projector projector_from_json_file(const std::string& path);
FrequencyPartition partition_from_json_file(const std::string& path);

/// Identification experiments and result documents.
std::vector<ExperimentSpec> experiments_from_json_file(const std::string& path);
Bounds experiment_bounds_from_json_file(const std::string& path);
std::string estimate_to_json(const EstimationResult& result);

std::string density_matrix_to_json(const EnsembleDensityMatrix& rho);

}  // namespace qctrlkit
