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

#include "qctrlkit/types.hpp"

namespace qctrlkit {

/// Dimension of the real Lie algebra generated by the given operators under
/// commutation. Hermitian inputs H are mapped to skew-Hermitian generators
/// -iH before closure. The system on an n-dimensional Hilbert space is fully
/// controllable iff the rank reaches at least n^2 - 1.
int controllability_rank(const std::vector<Matrix>& operators,
                         double rank_threshold = 1e-9);

}  // namespace qctrlkit
