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

#include "qctrlkit/rng.hpp"

#include <cmath>
#include <numbers>

namespace qctrlkit {

namespace {

// splitmix64 step (Steele, Lea, Flood 2014); full-period, well mixed.
uint64_t mix(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(uint64_t seed, uint64_t stream, uint64_t substream) {
    // Fold the key tuple into the initial state through independent mixes so
    // that nearby tuples produce unrelated streams.
    uint64_t s = seed;
    uint64_t a = mix(s);
    s = a ^ (stream * 0xda942042e4dd58b5ULL + 0x2545f4914f6cdd1dULL);
    uint64_t b = mix(s);
    s = b ^ (substream * 0xd6e8feb86659fd93ULL + 0xca5a826395121157ULL);
    state_ = mix(s);
}

uint64_t RngStream::next_u64() { return mix(state_); }

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double a, double b) { return a + (b - a) * uniform(); }

double RngStream::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace qctrlkit
