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

#include <utility>

#include "qctrlkit/types.hpp"

namespace qctrlkit {

/// Frobenius inner product <A, B> = Tr(A^dagger B).
Complex frobenius_inner(const Matrix& a, const Matrix& b);

double frobenius_norm(const Matrix& a);

/// Polar decomposition of a drive value: gamma = Omega e^{i phi} with
/// Omega >= 0 and phi the positive argument in [0, 2 pi). gamma = 0 maps
/// to (0, 0).
struct PolarValue {
    double modulus = 0.0;
    double phase = 0.0;
};
PolarValue polar_from_complex(Complex gamma);
Complex complex_from_polar(double modulus, double phase);

struct CartesianValue {
    double in_phase = 0.0;
    double quadrature = 0.0;
};
CartesianValue cartesian_from_complex(Complex gamma);
Complex complex_from_cartesian(double in_phase, double quadrature);

/// Hermitian quadrature operators of a drive: A_I = C + C^dagger,
/// A_Q = i (C - C^dagger). C reconstructs as (A_I - i A_Q) / 2.
std::pair<Matrix, Matrix> drive_quadratures(const Matrix& c);

bool is_hermitian(const Matrix& a, double tol = 1e-12);

/// Hermiticity check scaled by the matrix magnitude; throws NumericError
/// when violated.
void require_hermitian(const Matrix& a, double rel_tol, const std::string& what);

/// Assembles the per-segment control Hamiltonians
///   H_i = sum_j gamma_{i,j} C_j + H.C. + sum_l alpha_{i,l} A_l + D
/// on the joint segmentation of all participating pulses.
OperatorSeries assemble_hamiltonian(const ControlSolution& ctrl);

/// e^{-i H dt} for Hermitian H via eigendecomposition; the result is
/// unitary to machine precision.
Matrix matrix_exp_unitary(const Matrix& hamiltonian, double dt,
                          double hermiticity_tol = 1e-9);

/// Operational infidelity on the subspace selected by the projector:
///   I = 1 - |<P U_target, U_ctrl>_F / Tr(P)|^2.
/// Invariant under a global phase of either unitary.
FidelityValue optimal_infidelity(const Matrix& u_ctrl, const Matrix& u_target,
                                 const Projector& p);

/// State-transfer fidelity |<psi_initial| U |psi_final>|.
double state_fidelity(const Matrix& u, const Vector& psi_initial,
                      const Vector& psi_final);

}  // namespace qctrlkit
