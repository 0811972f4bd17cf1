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

#include <cstdint>

namespace qctrlkit {

/// Deterministic splittable random stream. Streams are keyed by a tuple
/// (seed, stream, substream) so that ensemble members are independent and
/// order-insensitive; the output sequence depends only on the key.
class RngStream {
  public:
    explicit RngStream(uint64_t seed, uint64_t stream = 0, uint64_t substream = 0);

    uint64_t next_u64();
    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform double in [a, b).
    double uniform(double a, double b);
    /// Standard normal via Box-Muller.
    double normal();

  private:
    uint64_t state_;
};

}  // namespace qctrlkit
