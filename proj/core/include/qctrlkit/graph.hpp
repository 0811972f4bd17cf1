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

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "qctrlkit/types.hpp"

namespace qctrlkit::graph {

using qctrlkit::Complex;
using qctrlkit::Matrix;
using qctrlkit::RealMatrix;
using qctrlkit::RealVector;
using qctrlkit::Vector;

/// Differentiable piecewise-constant operator series. Durations are data,
/// not optimization variables (variable durations go through EvolveConst).
struct Series {
    std::vector<Matrix> ops;
    RealVector durations;
};

/// Node port values. Adjoint convention: for real values dC = <adj, dx>;
/// for complex values dC = 2 Re <adj, dx> with <A, B> = sum conj(A) B.
using Value = std::variant<double, RealVector, Vector, Matrix, Series>;

class Node {
  public:
    virtual ~Node() = default;
    virtual std::string name() const = 0;
    virtual Value forward(const std::vector<const Value*>& in,
                          std::shared_ptr<void>& scratch) const = 0;
    virtual void backward(const Value& out_adj, const std::vector<const Value*>& in,
                          const Value& out, const std::shared_ptr<void>& scratch,
                          const std::vector<Value*>& in_adj) const = 0;
};

/// Composition of building blocks mapping a bounded variable vector to a
/// scalar cost and its gradient (reverse-mode differentiation). Node 0 is
/// the variable vector itself; nodes are added in topological order.
class CostGraph {
  public:
    explicit CostGraph(int variable_count);

    int variable_count() const { return n_vars_; }

    /// Appends a node consuming previously added node ids; returns its id.
    int add(std::unique_ptr<Node> node, std::vector<int> inputs = {});

    /// Declares the scalar cost node (defaults to the last added node).
    void set_output(int node_id);
    int output() const { return output_; }
    int size() const { return static_cast<int>(entries_.size()); }

    double value(const RealVector& v) const;
    double value_and_gradient(const RealVector& v, RealVector& grad) const;

    /// Value of an arbitrary node (diagnostics, pulse extraction).
    Value node_value(const RealVector& v, int node_id) const;

  private:
    struct Entry {
        std::unique_ptr<Node> node;
        std::vector<int> inputs;
    };
    void run_forward(const RealVector& v, std::vector<Value>& values,
                     std::vector<std::shared_ptr<void>>& scratch) const;

    std::vector<Entry> entries_;
    int output_ = -1;
    int n_vars_ = 0;
};

// ---------------------------------------------------------------------------
// Node constructors (sources, signal shaping, Hamiltonians, propagation,
// metrics). Each returns a Node for CostGraph::add.
// ---------------------------------------------------------------------------

std::unique_ptr<Node> make_slice(int offset, int length);
std::unique_ptr<Node> make_const_real(RealVector values);
std::unique_ptr<Node> make_const_matrix(Matrix m);
std::unique_ptr<Node> make_affine(double scale, double shift);
std::unique_ptr<Node> make_mask(RealVector binary_mask);
std::unique_ptr<Node> make_symmetrize();
std::unique_ptr<Node> make_linear_map(RealMatrix w);
std::unique_ptr<Node> make_concat();
std::unique_ptr<Node> make_polar();      // (moduli, phases) -> complex values
std::unique_ptr<Node> make_cartesian();  // (I, Q) -> complex values

std::unique_ptr<Node> make_drive_series(Matrix op, RealVector durations);
std::unique_ptr<Node> make_shift_series(Matrix op, RealVector durations);
std::unique_ptr<Node> make_scaled_pwc(RealVector base_values);
std::unique_ptr<Node> make_const_series(Series s);
std::unique_ptr<Node> make_sum_series();

std::unique_ptr<Node> make_unitary();
std::unique_ptr<Node> make_evolve_const(Matrix hamiltonian);
std::unique_ptr<Node> make_product();  // out = in[k-1] * ... * in[0]
/// G = P_m D(tau_m) ... P_1 D(tau_1) P_0 for a constant diagonal coupling:
/// inputs are (taus, P_0, ..., P_m) with D(tau) = exp(-i diag tau).
std::unique_ptr<Node> make_interleaved_evolution(RealVector diagonal);
std::unique_ptr<Node> make_kron();     // out = in[0] (x) in[1]

std::unique_ptr<Node> make_optimal_cost(Matrix u_target, Projector p);
std::unique_ptr<Node> make_state_cost(Vector psi_initial, Vector psi_target);
std::unique_ptr<Node> make_expectation(Vector psi, Matrix observable);

/// Filter-function cost over a fixed frequency/weight list:
/// cost = sum_nu weight_nu F(omega_nu), F per the toggling-frame transform
/// of the (constant) noise operator with `samples` uniform time samples.
std::unique_ptr<Node> make_filter_cost(Matrix noise_op, Projector p, int samples,
                                       std::vector<double> frequencies,
                                       std::vector<double> weights);

/// Table-driven conveniences over make_filter_cost.
std::unique_ptr<Node> make_quasi_static_cost(Matrix noise_op, Projector p, int samples);
std::unique_ptr<Node> make_fixed_freq_cost(Matrix noise_op, Projector p, int samples,
                                           double omega);
std::unique_ptr<Node> make_band_cost(Matrix noise_op, Projector p, int samples,
                                     double omega_lo, double omega_hi, int grid_points,
                                     RealVector psd_samples);

std::unique_ptr<Node> make_duration_penalty(double tau_max, double weight);
std::unique_ptr<Node> make_sum_squares(RealVector targets, RealVector weights);
std::unique_ptr<Node> make_sum_entries();
std::unique_ptr<Node> make_weighted_sum(RealVector weights);

/// Band-limiting LTI filter kernels, discretized as a linear map from an
/// n_in-segment uniform PWC signal on [0, tau] to an n_out-segment one.
/// Output values sample the convolution at output-segment midpoints.
enum class FilterKernel { Sinc, RC };
RealMatrix lti_filter_matrix(FilterKernel kernel, double cutoff, double tau, int n_in,
                             int n_out);
RealMatrix lti_filter_matrix_from_samples(const RealVector& kernel_values,
                                          double kernel_dt, double tau, int n_in,
                                          int n_out);

/// CRAB sampling matrix: column b holds basis function f_b evaluated at the
/// n_out segment midpoints. Default Fourier basis alternates
/// sin(2 pi k t / tau), cos(2 pi k t / tau) for k = 1, 2, ...
RealMatrix crab_fourier_basis(int n_basis, double tau, int n_out);
RealMatrix crab_basis_from_frequencies(const std::vector<double>& frequencies, double tau,
                                       int n_out);

}  // namespace qctrlkit::graph
