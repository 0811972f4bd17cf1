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

#include "qctrlkit/fft.hpp"

#include <mutex>

#include <fftw3.h>

namespace qctrlkit {

namespace {

std::mutex planner_mutex;  // FFTW plan creation is not thread-safe

Vector run(const Vector& x, int sign) {
    const int n = static_cast<int>(x.size());
    if (n == 0) return x;
    Vector out(n);
    Vector in = x;  // FFTW wants mutable input even for out-of-place plans
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex);
        plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                                reinterpret_cast<fftw_complex*>(out.data()), sign,
                                FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    }
    if (plan == nullptr) throw NumericError("fftw plan creation failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex);
        fftw_destroy_plan(plan);
    }
    return out;
}

}  // namespace

Vector dft_forward(const Vector& x) { return run(x, FFTW_FORWARD); }

Vector dft_backward(const Vector& x) { return run(x, FFTW_BACKWARD); }

}  // namespace qctrlkit
