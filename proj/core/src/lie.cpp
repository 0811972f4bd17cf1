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

#include "qctrlkit/lie.hpp"

#include <cmath>

namespace qctrlkit {

namespace {

// Real inner product on the real vector space of skew-Hermitian matrices.
double inner(const Matrix& a, const Matrix& b) {
    return (a.adjoint() * b).trace().real();
}

Matrix as_skew_generator(const Matrix& op) {
    const Matrix herm = 0.5 * (op + op.adjoint());
    const Matrix skew = 0.5 * (op - op.adjoint());
    const double h = herm.norm();
    const double s = skew.norm();
    const double scale = std::max(h, s);
    if (scale == 0.0) return op;
    if (s <= 1e-12 * scale) return Complex(0, -1) * herm;  // Hermitian input: use -iH
    if (h <= 1e-12 * scale) return skew;                   // already skew-Hermitian
    throw ConfigError("controllability_rank: operators must be Hermitian or anti-Hermitian");
}

}  // namespace

int controllability_rank(const std::vector<Matrix>& operators, double rank_threshold) {
    if (operators.empty()) return 0;
    const auto n = operators.front().rows();
    for (const Matrix& op : operators) {
        if (op.rows() != n || op.cols() != n) {
            throw ConfigError("controllability_rank: operators must share one dimension");
        }
    }

    // Gram-Schmidt closure under commutation. Candidates are normalized
    // before orthogonalization, so the rank decision (residual norm above
    // rank_threshold) is invariant under real scaling of any input.
    std::vector<Matrix> basis;

    auto try_add = [&](const Matrix& candidate) -> bool {
        const double original = candidate.norm();
        if (!(original > 0.0)) return false;
        Matrix m = candidate / original;
        for (int pass = 0; pass < 2; ++pass) {  // re-orthogonalize once
            for (const Matrix& b : basis) m -= inner(b, m) * b;
        }
        const double residual = m.norm();
        if (residual <= rank_threshold) return false;
        basis.push_back(m / residual);
        return true;
    };

    std::vector<Matrix> queue;
    for (const Matrix& op : operators) {
        if (try_add(as_skew_generator(op))) queue.push_back(basis.back());
    }

    const int max_rank = static_cast<int>(n * n);
    size_t head = 0;
    while (head < queue.size() && static_cast<int>(basis.size()) < max_rank) {
        const Matrix current = queue[head++];
        const size_t existing = basis.size();
        for (size_t k = 0; k < existing; ++k) {
            const Matrix comm = current * basis[k] - basis[k] * current;
            if (try_add(comm)) queue.push_back(basis.back());
            if (static_cast<int>(basis.size()) >= max_rank) break;
        }
    }
    return static_cast<int>(basis.size());
}

}  // namespace qctrlkit
