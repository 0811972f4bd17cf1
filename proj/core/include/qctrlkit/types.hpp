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

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qctrlkit {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Bad or inconsistent user-supplied configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical failure during a computation (CLI exit code 3).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File-system / format failure (CLI exit code 4).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Partition of a time interval [0, tau] into contiguous segments.
class Segmentation {
  public:
    explicit Segmentation(std::vector<double> durations);
    static Segmentation uniform(double total, int count);

    int count() const { return static_cast<int>(durations_.size()); }
    double total() const { return total_; }
    double duration(int i) const { return durations_[static_cast<size_t>(i)]; }
    const std::vector<double>& durations() const { return durations_; }

    /// Start times t_0 = 0, ..., t_m = tau (count()+1 entries).
    std::vector<double> boundaries() const;

    /// Index of the segment covering time t (half-open [t_{i-1}, t_i),
    /// with t = tau mapping to the last segment).
    int segment_at(double t) const;

    bool same_as(const Segmentation& other, double rel_tol = 1e-12) const;

  private:
    std::vector<double> durations_;
    double total_ = 0.0;
};

/// Real-valued piecewise-constant scalar signal.
struct RealPwc {
    RealVector values;
    Segmentation segmentation;

    RealPwc(RealVector v, Segmentation seg);
    static RealPwc constant(double value, double total, int count = 1);
    double at(double t) const { return values[segmentation.segment_at(t)]; }
};

/// Complex-valued piecewise-constant scalar signal (drive envelopes).
struct ComplexPwc {
    Vector values;
    Segmentation segmentation;

    ComplexPwc(Vector v, Segmentation seg);
    static ComplexPwc constant(Complex value, double total, int count = 1);
    Complex at(double t) const { return values[segmentation.segment_at(t)]; }
};

/// Piecewise-constant operator-valued function of time.
struct OperatorSeries {
    std::vector<Matrix> ops;
    Segmentation segmentation;

    OperatorSeries(std::vector<Matrix> o, Segmentation seg);
    static OperatorSeries constant(Matrix op, double total);
    int dimension() const { return static_cast<int>(ops.front().rows()); }
    const Matrix& at(double t) const { return ops[static_cast<size_t>(segmentation.segment_at(t))]; }
};

/// Complex pulse gamma_j(t) on a (generally non-Hermitian) operator C_j;
/// contributes gamma C + gamma* C^dagger to the Hamiltonian.
struct DriveTerm {
    ComplexPwc pulse;
    Matrix op;

    DriveTerm(ComplexPwc p, Matrix c);
};

/// Real pulse alpha_l(t) on a Hermitian operator A_l.
struct ShiftTerm {
    ShiftTerm(RealPwc p, Matrix a);

    RealPwc pulse;
    Matrix op;
};

/// Full control definition: drives, shifts and a constant Hermitian drift.
struct ControlSolution {
    std::vector<DriveTerm> drives;
    std::vector<ShiftTerm> shifts;
    Matrix drift;
    int dimension = 0;
    double duration = 0.0;

    ControlSolution(std::vector<DriveTerm> d, std::vector<ShiftTerm> s,
                    Matrix drift_op, double tau);
    /// Drift-only (free evolution) control of the given duration.
    static ControlSolution free_evolution(Matrix drift_op, double tau);
};

/// Diagonal 0/1 projection matrix; only the diagonal is ever consumed.
class Projector {
  public:
    explicit Projector(std::vector<int> diagonal);
    static Projector full(int dimension);

    int dimension() const { return static_cast<int>(diagonal_.size()); }
    int trace() const { return trace_; }
    int entry(int l) const { return diagonal_[static_cast<size_t>(l)]; }
    const std::vector<int>& diagonal() const { return diagonal_; }

  private:
    std::vector<int> diagonal_;
    int trace_ = 0;
};

enum class FidelityKind { Optimal, Robust, State };

struct FidelityValue {
    double value = 0.0;
    FidelityKind kind = FidelityKind::Optimal;
    double standard_error = 0.0;  // populated by Monte Carlo estimates
};

}  // namespace qctrlkit
