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

#include "qctrlkit/types.hpp"

namespace qctrlkit {

/// Unnormalized DFT: X_q = sum_j x_j e^{-2 pi i j q / L}.
Vector dft_forward(const Vector& x);

/// Unnormalized inverse DFT: x_j = sum_q X_q e^{+2 pi i j q / L}.
Vector dft_backward(const Vector& x);

}  // namespace qctrlkit
