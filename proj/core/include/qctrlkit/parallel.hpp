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

namespace qctrlkit {

/// Worker-pool size used by parallel_for. Defaults to the machine
/// parallelism, overridable via set_thread_count (the CLI wires --threads
/// and the QCTRLKIT_THREADS environment variable through this).
int thread_count();
void set_thread_count(int n);

/// Runs fn(i) for i in [0, n). Each index is processed exactly once;
/// results must be written to per-index slots so that the merged output is
/// deterministic regardless of scheduling.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace qctrlkit
