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

#include "qctrlkit/control.hpp"

#include <cmath>
#include <numbers>

#include "qctrlkit/simulator.hpp"

namespace qctrlkit {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

Segmentation::Segmentation(std::vector<double> durations)
    : durations_(std::move(durations)) {
    if (durations_.empty()) {
        throw ConfigError("segmentation requires at least one segment");
    }
    for (double d : durations_) {
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw ConfigError("segment durations must be positive and finite");
        }
        total_ += d;
    }
}

Segmentation Segmentation::uniform(double total, int count) {
    if (count < 1 || !(total > 0.0)) {
        throw ConfigError("uniform segmentation needs count >= 1 and total > 0");
    }
    return Segmentation(std::vector<double>(static_cast<size_t>(count), total / count));
}

std::vector<double> Segmentation::boundaries() const {
    std::vector<double> t(durations_.size() + 1, 0.0);
    for (size_t i = 0; i < durations_.size(); ++i) t[i + 1] = t[i] + durations_[i];
    t.back() = total_;
    return t;
}

int Segmentation::segment_at(double t) const {
    if (t < -1e-12 * total_ || t > total_ * (1.0 + 1e-12)) {
        throw ConfigError("time outside [0, tau]");
    }
    double acc = 0.0;
    for (size_t i = 0; i < durations_.size(); ++i) {
        acc += durations_[i];
        if (t < acc) return static_cast<int>(i);
    }
    return count() - 1;
}

bool Segmentation::same_as(const Segmentation& other, double rel_tol) const {
    if (count() != other.count()) return false;
    const double scale = std::max(total_, other.total_);
    for (int i = 0; i < count(); ++i) {
        if (std::abs(duration(i) - other.duration(i)) > rel_tol * scale) return false;
    }
    return true;
}

RealPwc::RealPwc(RealVector v, Segmentation seg)
    : values(std::move(v)), segmentation(std::move(seg)) {
    if (values.size() != segmentation.count()) {
        throw ConfigError("pwc value count does not match segment count");
    }
}

RealPwc RealPwc::constant(double value, double total, int count) {
    return RealPwc(RealVector::Constant(count, value), Segmentation::uniform(total, count));
}

ComplexPwc::ComplexPwc(Vector v, Segmentation seg)
    : values(std::move(v)), segmentation(std::move(seg)) {
    if (values.size() != segmentation.count()) {
        throw ConfigError("pwc value count does not match segment count");
    }
}

ComplexPwc ComplexPwc::constant(Complex value, double total, int count) {
    return ComplexPwc(Vector::Constant(count, value), Segmentation::uniform(total, count));
}

OperatorSeries::OperatorSeries(std::vector<Matrix> o, Segmentation seg)
    : ops(std::move(o)), segmentation(std::move(seg)) {
    if (static_cast<int>(ops.size()) != segmentation.count()) {
        throw ConfigError("operator count does not match segment count");
    }
    const auto dim = ops.front().rows();
    for (const Matrix& m : ops) {
        if (m.rows() != dim || m.cols() != dim) {
            throw ConfigError("operator series entries must be square and equally sized");
        }
    }
}

OperatorSeries OperatorSeries::constant(Matrix op, double total) {
    return OperatorSeries({std::move(op)}, Segmentation::uniform(total, 1));
}

DriveTerm::DriveTerm(ComplexPwc p, Matrix c) : pulse(std::move(p)), op(std::move(c)) {
    if (op.rows() != op.cols()) throw ConfigError("drive operator must be square");
}

ShiftTerm::ShiftTerm(RealPwc p, Matrix a) : pulse(std::move(p)), op(std::move(a)) {
    if (op.rows() != op.cols()) throw ConfigError("shift operator must be square");
    require_hermitian(op, 1e-12, "shift operator");
}

ControlSolution::ControlSolution(std::vector<DriveTerm> d, std::vector<ShiftTerm> s,
                                 Matrix drift_op, double tau)
    : drives(std::move(d)), shifts(std::move(s)), drift(std::move(drift_op)), duration(tau) {
    if (drift.rows() != drift.cols()) throw ConfigError("drift must be square");
    require_hermitian(drift, 1e-12, "drift");
    dimension = static_cast<int>(drift.rows());
    if (!(duration > 0.0)) throw ConfigError("control duration must be positive");
    for (const auto& term : drives) {
        if (term.op.rows() != dimension) throw ConfigError("drive operator dimension mismatch");
        if (std::abs(term.pulse.segmentation.total() - duration) > 1e-9 * duration) {
            throw ConfigError("drive pulse duration does not match control duration");
        }
    }
    for (const auto& term : shifts) {
        if (term.op.rows() != dimension) throw ConfigError("shift operator dimension mismatch");
        if (std::abs(term.pulse.segmentation.total() - duration) > 1e-9 * duration) {
            throw ConfigError("shift pulse duration does not match control duration");
        }
    }
}

ControlSolution ControlSolution::free_evolution(Matrix drift_op, double tau) {
    return ControlSolution({}, {}, std::move(drift_op), tau);
}

Projector::Projector(std::vector<int> diagonal) : diagonal_(std::move(diagonal)) {
    for (int p : diagonal_) {
        if (p != 0 && p != 1) throw ConfigError("projector entries must be 0 or 1");
        trace_ += p;
    }
    if (trace_ == 0) throw ConfigError("projector must have at least one nonzero entry");
}

Projector Projector::full(int dimension) {
    return Projector(std::vector<int>(static_cast<size_t>(dimension), 1));
}

// ---------------------------------------------------------------------------
// Frobenius algebra and control coordinates
// ---------------------------------------------------------------------------

Complex frobenius_inner(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ConfigError("frobenius_inner: shape mismatch");
    }
    return (a.adjoint() * b).trace();
}

double frobenius_norm(const Matrix& a) { return a.norm(); }

PolarValue polar_from_complex(Complex gamma) {
    PolarValue out;
    out.modulus = std::abs(gamma);
    if (out.modulus == 0.0) return out;
    double phi = std::arg(gamma);
    if (phi < 0.0) phi += 2.0 * std::numbers::pi;
    out.phase = phi;
    return out;
}

Complex complex_from_polar(double modulus, double phase) {
    return modulus * Complex(std::cos(phase), std::sin(phase));
}

CartesianValue cartesian_from_complex(Complex gamma) {
    return CartesianValue{gamma.real(), gamma.imag()};
}

Complex complex_from_cartesian(double in_phase, double quadrature) {
    return Complex(in_phase, quadrature);
}

std::pair<Matrix, Matrix> drive_quadratures(const Matrix& c) {
    if (c.rows() != c.cols()) throw ConfigError("drive_quadratures: operator must be square");
    Matrix a_i = c + c.adjoint();
    Matrix a_q = Complex(0, 1) * (c - c.adjoint());
    return {std::move(a_i), std::move(a_q)};
}

bool is_hermitian(const Matrix& a, double tol) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

void require_hermitian(const Matrix& a, double rel_tol, const std::string& what) {
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if (!is_hermitian(a, rel_tol * scale)) {
        throw NumericError(what + " is not Hermitian within tolerance");
    }
}

// ---------------------------------------------------------------------------
// Hamiltonian assembly and propagation primitives
// ---------------------------------------------------------------------------

OperatorSeries assemble_hamiltonian(const ControlSolution& ctrl) {
    std::vector<Segmentation> grids;
    grids.reserve(ctrl.drives.size() + ctrl.shifts.size() + 1);
    for (const auto& d : ctrl.drives) grids.push_back(d.pulse.segmentation);
    for (const auto& s : ctrl.shifts) grids.push_back(s.pulse.segmentation);
    if (grids.empty()) grids.push_back(Segmentation::uniform(ctrl.duration, 1));

    const JointGrid joint = joint_segments(grids);
    const int n = joint.segmentation.count();

    std::vector<Matrix> ops(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Matrix h = ctrl.drift;
        int series = 0;
        for (const auto& d : ctrl.drives) {
            const Complex g = d.pulse.values[joint.source_segment(series++, i)];
            h += g * d.op + std::conj(g) * d.op.adjoint();
        }
        for (const auto& s : ctrl.shifts) {
            const double alpha = s.pulse.values[joint.source_segment(series++, i)];
            h += alpha * s.op;
        }
        ops[static_cast<size_t>(i)] = std::move(h);
    }
    return OperatorSeries(std::move(ops), joint.segmentation);
}

Matrix matrix_exp_unitary(const Matrix& hamiltonian, double dt, double hermiticity_tol) {
    if (dt < 0.0) throw ConfigError("matrix_exp_unitary: dt must be nonnegative");
    require_hermitian(hamiltonian, hermiticity_tol, "hamiltonian");
    if (dt == 0.0) return Matrix::Identity(hamiltonian.rows(), hamiltonian.cols());

    Eigen::SelfAdjointEigenSolver<Matrix> es(hamiltonian);
    if (es.info() != Eigen::Success) {
        throw NumericError("matrix_exp_unitary: eigendecomposition failed");
    }
    const auto& lambda = es.eigenvalues();
    Vector phases(lambda.size());
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        phases[k] = std::polar(1.0, -lambda[k] * dt);
    }
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

FidelityValue optimal_infidelity(const Matrix& u_ctrl, const Matrix& u_target,
                                 const Projector& p) {
    if (u_ctrl.rows() != u_target.rows() || u_ctrl.rows() != p.dimension()) {
        throw ConfigError("optimal_infidelity: dimension mismatch");
    }
    // <P U_target, U_ctrl>_F = Tr(U_target^dagger P U_ctrl) for diagonal 0/1 P.
    Complex overlap = 0.0;
    for (int l = 0; l < p.dimension(); ++l) {
        if (p.entry(l) == 0) continue;
        overlap += u_target.row(l).dot(u_ctrl.row(l));
    }
    const double f = std::norm(overlap / static_cast<double>(p.trace()));
    FidelityValue out;
    out.kind = FidelityKind::Optimal;
    out.value = std::min(1.0, std::max(0.0, 1.0 - f));
    return out;
}

double state_fidelity(const Matrix& u, const Vector& psi_initial, const Vector& psi_final) {
    if (psi_initial.size() != u.rows() || psi_final.size() != u.cols()) {
        throw ConfigError("state_fidelity: dimension mismatch");
    }
    if (std::abs(psi_initial.norm() - 1.0) > 1e-9 || std::abs(psi_final.norm() - 1.0) > 1e-9) {
        throw ConfigError("state_fidelity: states must be normalized");
    }
    return std::abs(psi_initial.dot(u * psi_final));
}

}  // namespace qctrlkit
