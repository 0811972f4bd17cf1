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

#include "qctrlkit/noise.hpp"
#include "qctrlkit/types.hpp"

namespace qctrlkit {

/// CSV I/O. '.' decimal, no locale, full round-trip precision, one header
/// row with units.

void write_psd_csv(const std::string& path, const OneSidedPsd& psd);
OneSidedPsd read_psd_csv(const std::string& path);

void write_series_csv(const std::string& path, const NoiseTimeSeries& series);
NoiseTimeSeries read_series_csv(const std::string& path);

/// Single numeric column (optionally headed); used for frequency lists and
/// infidelity records.
RealVector read_column_csv(const std::string& path, int column = 0);

void write_matrix_csv(const std::string& path, const RealMatrix& m,
                      const std::string& header = "");
RealMatrix read_matrix_csv(const std::string& path);

void write_columns_csv(const std::string& path, const std::string& header,
                       const std::vector<RealVector>& columns);

}  // namespace qctrlkit
