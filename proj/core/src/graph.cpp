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

#include "qctrlkit/graph.hpp"

#include <cmath>
#include <numbers>

#include "qctrlkit/control.hpp"

namespace qctrlkit::graph {

namespace {

constexpr double kPi = std::numbers::pi;

using ConfigError = qctrlkit::ConfigError;
using NumericError = qctrlkit::NumericError;

Value zero_like(const Value& v) {
    if (std::holds_alternative<double>(v)) return 0.0;
    if (const auto* r = std::get_if<RealVector>(&v)) return RealVector(RealVector::Zero(r->size()));
    if (const auto* c = std::get_if<Vector>(&v)) return Vector(Vector::Zero(c->size()));
    if (const auto* m = std::get_if<Matrix>(&v)) return Matrix(Matrix::Zero(m->rows(), m->cols()));
    const auto& s = std::get<Series>(v);
    Series z;
    z.durations = s.durations;
    z.ops.reserve(s.ops.size());
    for (const Matrix& op : s.ops) z.ops.emplace_back(Matrix::Zero(op.rows(), op.cols()));
    return z;
}

const RealVector& as_real(const Value& v, const char* who) {
    if (const auto* r = std::get_if<RealVector>(&v)) return *r;
    throw ConfigError(std::string(who) + ": expected a real vector input");
}

const Vector& as_complex(const Value& v, const char* who) {
    if (const auto* c = std::get_if<Vector>(&v)) return *c;
    throw ConfigError(std::string(who) + ": expected a complex vector input");
}

const Matrix& as_matrix(const Value& v, const char* who) {
    if (const auto* m = std::get_if<Matrix>(&v)) return *m;
    throw ConfigError(std::string(who) + ": expected a matrix input");
}

const Series& as_series(const Value& v, const char* who) {
    if (const auto* s = std::get_if<Series>(&v)) return *s;
    throw ConfigError(std::string(who) + ": expected an operator series input");
}

double as_scalar(const Value& v, const char* who) {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    throw ConfigError(std::string(who) + ": expected a scalar input");
}

// Eigendecomposition bundle for exp(-i H dt) and its directional adjoint.
struct HermitianExp {
    Matrix vectors;
    RealVector eigenvalues;
    Matrix unitary;  // exp(-i H dt)
    double dt = 0.0;
};

HermitianExp hermitian_exp(const Matrix& h, double dt) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) throw NumericError("graph: eigendecomposition failed");
    HermitianExp out;
    out.vectors = es.eigenvectors();
    out.eigenvalues = es.eigenvalues();
    out.dt = dt;
    Vector phases(out.eigenvalues.size());
    for (Eigen::Index k = 0; k < phases.size(); ++k) {
        phases[k] = std::polar(1.0, -out.eigenvalues[k] * dt);
    }
    out.unitary = out.vectors * phases.asDiagonal() * out.vectors.adjoint();
    return out;
}

// Adjoint of U = exp(-i H dt) w.r.t. Hermitian H: given U_adj, returns H_adj
// via the Loewner (divided difference) matrix of g(x) = e^{-i x dt}. The
// divided difference is evaluated in the cancellation-free sinc form.
Matrix hermitian_exp_adjoint(const HermitianExp& e, const Matrix& u_adj) {
    const Eigen::Index n = e.eigenvalues.size();
    Matrix phi(n, n);
    for (Eigen::Index p = 0; p < n; ++p) {
        for (Eigen::Index q = 0; q < n; ++q) {
            const double mean = 0.5 * (e.eigenvalues[p] + e.eigenvalues[q]);
            const double half = 0.5 * (e.eigenvalues[p] - e.eigenvalues[q]) * e.dt;
            const double sinc = std::abs(half) < 1e-150 ? 1.0 : std::sin(half) / half;
            phi(p, q) = Complex(0.0, -e.dt) * sinc * std::polar(1.0, -mean * e.dt);
        }
    }
    const Matrix tilde = e.vectors.adjoint() * u_adj * e.vectors;
    return e.vectors * tilde.cwiseProduct(phi.conjugate()) * e.vectors.adjoint();
}

// ---------------------------------------------------------------------------
// Sources and signal shaping
// ---------------------------------------------------------------------------

class VariablesNode final : public Node {
  public:
    std::string name() const override { return "variables"; }
    Value forward(const std::vector<const Value*>&, std::shared_ptr<void>&) const override {
        throw NumericError("variables node is evaluated by the graph engine");
    }
    void backward(const Value&, const std::vector<const Value*>&, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>&) const override {}
};

class SliceNode final : public Node {
  public:
    SliceNode(int offset, int length) : offset_(offset), length_(length) {
        if (offset < 0 || length < 1) throw ConfigError("slice: bad extent");
    }
    std::string name() const override { return "slice"; }
    Value forward(const std::vector<const Value*>& in, std::shared_ptr<void>&) const override {
        const RealVector& v = as_real(*in[0], "slice");
        if (offset_ + length_ > v.size()) throw ConfigError("slice: extent outside variables");
        return RealVector(v.segment(offset_, length_));
    }
    void backward(const Value& out_adj, const std::vector<const Value*>&, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>& in_adj) const override {
        std::get<RealVector>(*in_adj[0]).segment(offset_, length_) +=
            std::get<RealVector>(out_adj);
    }

  private:
    int offset_;
    int length_;
};

class ConstRealNode final : public Node {
  public:
    explicit ConstRealNode(RealVector v) : values_(std::move(v)) {}
    std::string name() const override { return "const_real"; }
    Value forward(const std::vector<const Value*>&, std::shared_ptr<void>&) const override {
        return values_;
    }
    void backward(const Value&, const std::vector<const Value*>&, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>&) const override {}

  private:
    RealVector values_;
};

class ConstMatrixNode final : public Node {
  public:
    explicit ConstMatrixNode(Matrix m) : m_(std::move(m)) {}
    std::string name() const override { return "const_matrix"; }
    Value forward(const std::vector<const Value*>&, std::shared_ptr<void>&) const override {
        return m_;
    }
    void backward(const Value&, const std::vector<const Value*>&, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>&) const override {}

  private:
    Matrix m_;
};

class AffineNode final : public Node {
  public:
    AffineNode(double scale, double shift) : scale_(scale), shift_(shift) {}
    std::string name() const override { return "affine"; }
    Value forward(const std::vector<const Value*>& in, std::shared_ptr<void>&) const override {
        const RealVector& v = as_real(*in[0], "affine");
        return RealVector(scale_ * v.array() + shift_);
    }
    void backward(const Value& out_adj, const std::vector<const Value*>&, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>& in_adj) const override {
        std::get<RealVector>(*in_adj[0]) += scale_ * std::get<RealVector>(out_adj);
    }

  private:
    double scale_;
    double shift_;
};

class MaskNode final : public Node {
  public:
    explicit MaskNode(RealVector mask) : mask_(std::move(mask)) {
        for (Eigen::Index i = 0; i < mask_.size(); ++i) {
            if (mask_[i] != 0.0 && mask_[i] != 1.0) {
                throw ConfigError("mask: entries must be binary");
            }
        }
    }
    std::string name() const override { return "mask"; }
    Value forward(const std::vector<const Value*>& in, std::shared_ptr<void>&) const override {
        const RealVector& v = as_real(*in[0], "mask");
        if (v.size() != mask_.size()) throw ConfigError("mask: length mismatch");
        return RealVector(v.cwiseProduct(mask_));
    }
    void backward(const Value& out_adj, const std::vector<const Value*>&, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>& in_adj) const override {
        std::get<RealVector>(*in_adj[0]) +=
            std::get<RealVector>(out_adj).cwiseProduct(mask_);
    }

  private:
    RealVector mask_;
};

class SymmetrizeNode final : public Node {
  public:
    std::string name() const override { return "symmetrize"; }
    Value forward(const std::vector<const Value*>& in, std::shared_ptr<void>&) const override {
        const RealVector& v = as_real(*in[0], "symmetrize");
        const Eigen::Index n = v.size();
        RealVector out(2 * n);
        out.head(n) = v;
        out.tail(n) = v.reverse();
        return out;
    }
    void backward(const Value& out_adj, const std::vector<const Value*>& in, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>& in_adj) const override {
        const Eigen::Index n = as_real(*in[0], "symmetrize").size();
        const RealVector& adj = std::get<RealVector>(out_adj);
        std::get<RealVector>(*in_adj[0]) += adj.head(n) + adj.tail(n).reverse();
    }
};

class LinearMapNode final : public Node {
  public:
    explicit LinearMapNode(RealMatrix w) : w_(std::move(w)) {}
    std::string name() const override { return "linear_map"; }
    Value forward(const std::vector<const Value*>& in, std::shared_ptr<void>&) const override {
        const RealVector& v = as_real(*in[0], "linear_map");
        if (v.size() != w_.cols()) throw ConfigError("linear_map: length mismatch");
        return RealVector(w_ * v);
    }
    void backward(const Value& out_adj, const std::vector<const Value*>&, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>& in_adj) const override {
        std::get<RealVector>(*in_adj[0]) +=
            w_.transpose() * std::get<RealVector>(out_adj);
    }

  private:
    RealMatrix w_;
};

class ConcatNode final : public Node {
  public:
    std::string name() const override { return "concat"; }
    Value forward(const std::vector<const Value*>& in, std::shared_ptr<void>&) const override {
        Eigen::Index total = 0;
        for (const Value* v : in) {
            total += std::holds_alternative<double>(*v)
                         ? 1
                         : as_real(*v, "concat").size();
        }
        RealVector out(total);
        Eigen::Index at = 0;
        for (const Value* v : in) {
            if (const auto* d = std::get_if<double>(v)) {
                out[at++] = *d;
            } else {
                const RealVector& r = std::get<RealVector>(*v);
                out.segment(at, r.size()) = r;
                at += r.size();
            }
        }
        return out;
    }
    void backward(const Value& out_adj, const std::vector<const Value*>& in, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>& in_adj) const override {
        const RealVector& adj = std::get<RealVector>(out_adj);
        Eigen::Index at = 0;
        for (size_t i = 0; i < in.size(); ++i) {
            if (std::holds_alternative<double>(*in[i])) {
                std::get<double>(*in_adj[i]) += adj[at++];
            } else {
                RealVector& slot = std::get<RealVector>(*in_adj[i]);
                slot += adj.segment(at, slot.size());
                at += slot.size();
            }
        }
    }
};

class PolarNode final : public Node {
  public:
    std::string name() const override { return "polar"; }
    Value forward(const std::vector<const Value*>& in, std::shared_ptr<void>&) const override {
        const RealVector& mod = as_real(*in[0], "polar");
        const RealVector& phase = as_real(*in[1], "polar");
        if (mod.size() != phase.size()) throw ConfigError("polar: length mismatch");
        Vector out(mod.size());
        for (Eigen::Index i = 0; i < mod.size(); ++i) out[i] = std::polar(mod[i], phase[i]);
        return out;
    }
    void backward(const Value& out_adj, const std::vector<const Value*>& in, const Value& out,
                  const std::shared_ptr<void>&, const std::vector<Value*>& in_adj) const override {
        const Vector& adj = std::get<Vector>(out_adj);
        const Vector& gamma = std::get<Vector>(out);
        const RealVector& phase = as_real(*in[1], "polar");
        RealVector& mod_adj = std::get<RealVector>(*in_adj[0]);
        RealVector& phase_adj = std::get<RealVector>(*in_adj[1]);
        for (Eigen::Index i = 0; i < adj.size(); ++i) {
            const Complex e = std::polar(1.0, phase[i]);
            mod_adj[i] += 2.0 * std::real(std::conj(adj[i]) * e);
            phase_adj[i] += -2.0 * std::imag(std::conj(adj[i]) * gamma[i]);
        }
    }
};

class CartesianNode final : public Node {
  public:
    std::string name() const override { return "cartesian"; }
    Value forward(const std::vector<const Value*>& in, std::shared_ptr<void>&) const override {
        const RealVector& re = as_real(*in[0], "cartesian");
        const RealVector& im = as_real(*in[1], "cartesian");
        if (re.size() != im.size()) throw ConfigError("cartesian: length mismatch");
        Vector out(re.size());
        for (Eigen::Index i = 0; i < re.size(); ++i) out[i] = Complex(re[i], im[i]);
        return out;
    }
    void backward(const Value& out_adj, const std::vector<const Value*>&, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>& in_adj) const override {
        const Vector& adj = std::get<Vector>(out_adj);
        RealVector& re_adj = std::get<RealVector>(*in_adj[0]);
        RealVector& im_adj = std::get<RealVector>(*in_adj[1]);
        for (Eigen::Index i = 0; i < adj.size(); ++i) {
            re_adj[i] += 2.0 * adj[i].real();
            im_adj[i] += 2.0 * adj[i].imag();
        }
    }
};

// ---------------------------------------------------------------------------
// Hamiltonian terms
// ---------------------------------------------------------------------------

class DriveSeriesNode final : public Node {
  public:
    DriveSeriesNode(Matrix op, RealVector durations)
        : op_(std::move(op)), op_dag_(op_.adjoint()), durations_(std::move(durations)) {}
    std::string name() const override { return "drive"; }
    Value forward(const std::vector<const Value*>& in, std::shared_ptr<void>&) const override {
        // Real-valued pulses are accepted and promoted to complex.
        const bool real_pulse = std::holds_alternative<RealVector>(*in[0]);
        const Vector gamma = real_pulse
                                 ? Vector(as_real(*in[0], "drive").cast<Complex>())
                                 : as_complex(*in[0], "drive");
        if (gamma.size() != durations_.size()) throw ConfigError("drive: segment mismatch");
        Series s;
        s.durations = durations_;
        s.ops.reserve(static_cast<size_t>(gamma.size()));
        for (Eigen::Index i = 0; i < gamma.size(); ++i) {
            s.ops.emplace_back(gamma[i] * op_ + std::conj(gamma[i]) * op_dag_);
        }
        return s;
    }
    void backward(const Value& out_adj, const std::vector<const Value*>& in, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>& in_adj) const override {
        const Series& adj = std::get<Series>(out_adj);
        const bool real_pulse = std::holds_alternative<RealVector>(*in[0]);
        for (size_t i = 0; i < adj.ops.size(); ++i) {
            const Complex s = (adj.ops[i].adjoint() * op_).trace();
            const Complex sd = (adj.ops[i].adjoint() * op_dag_).trace();
            const Complex g_adj = std::conj(s) + sd;
            if (real_pulse) {
                std::get<RealVector>(*in_adj[0])[static_cast<Eigen::Index>(i)] +=
                    2.0 * g_adj.real();
            } else {
                std::get<Vector>(*in_adj[0])[static_cast<Eigen::Index>(i)] += g_adj;
            }
        }
    }

  private:
    Matrix op_;
    Matrix op_dag_;
    RealVector durations_;
};

class ShiftSeriesNode final : public Node {
  public:
    ShiftSeriesNode(Matrix op, RealVector durations)
        : op_(std::move(op)), durations_(std::move(durations)) {
        qctrlkit::require_hermitian(op_, 1e-12, "shift operator");
    }
    std::string name() const override { return "shift"; }
    Value forward(const std::vector<const Value*>& in, std::shared_ptr<void>&) const override {
        const RealVector& alpha = as_real(*in[0], "shift");
        if (alpha.size() != durations_.size()) throw ConfigError("shift: segment mismatch");
        Series s;
        s.durations = durations_;
        s.ops.reserve(static_cast<size_t>(alpha.size()));
        for (Eigen::Index i = 0; i < alpha.size(); ++i) s.ops.emplace_back(alpha[i] * op_);
        return s;
    }
    void backward(const Value& out_adj, const std::vector<const Value*>&, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>& in_adj) const override {
        const Series& adj = std::get<Series>(out_adj);
        RealVector& alpha_adj = std::get<RealVector>(*in_adj[0]);
        for (size_t i = 0; i < adj.ops.size(); ++i) {
            alpha_adj[static_cast<Eigen::Index>(i)] +=
                2.0 * (adj.ops[i].adjoint() * op_).trace().real();
        }
    }

  private:
    Matrix op_;
    RealVector durations_;
};

class ScaledPwcNode final : public Node {
  public:
    explicit ScaledPwcNode(RealVector base) : base_(std::move(base)) {}
    std::string name() const override { return "scaled_pwc"; }
    Value forward(const std::vector<const Value*>& in, std::shared_ptr<void>&) const override {
        const RealVector& theta = as_real(*in[0], "scaled_pwc");
        if (theta.size() != 1) throw ConfigError("scaled_pwc: scale must be one variable");
        return RealVector(theta[0] * base_);
    }
    void backward(const Value& out_adj, const std::vector<const Value*>&, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>& in_adj) const override {
        std::get<RealVector>(*in_adj[0])[0] += base_.dot(std::get<RealVector>(out_adj));
    }

  private:
    RealVector base_;
};

class ConstSeriesNode final : public Node {
  public:
    explicit ConstSeriesNode(Series s) : series_(std::move(s)) {}
    std::string name() const override { return "const_series"; }
    Value forward(const std::vector<const Value*>&, std::shared_ptr<void>&) const override {
        return series_;
    }
    void backward(const Value&, const std::vector<const Value*>&, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>&) const override {}

  private:
    Series series_;
};

class SumSeriesNode final : public Node {
  public:
    std::string name() const override { return "sum_series"; }
    Value forward(const std::vector<const Value*>& in, std::shared_ptr<void>&) const override {
        if (in.empty()) throw ConfigError("sum_series: needs at least one input");
        Series out = as_series(*in[0], "sum_series");
        for (size_t k = 1; k < in.size(); ++k) {
            const Series& s = as_series(*in[k], "sum_series");
            if (s.ops.size() != out.ops.size() ||
                (s.durations - out.durations).cwiseAbs().maxCoeff() >
                    1e-12 * out.durations.sum()) {
                throw ConfigError("sum_series: incompatible segmentations");
            }
            for (size_t i = 0; i < out.ops.size(); ++i) out.ops[i] += s.ops[i];
        }
        return out;
    }
    void backward(const Value& out_adj, const std::vector<const Value*>& in, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>& in_adj) const override {
        const Series& adj = std::get<Series>(out_adj);
        for (size_t k = 0; k < in.size(); ++k) {
            Series& slot = std::get<Series>(*in_adj[k]);
            for (size_t i = 0; i < adj.ops.size(); ++i) slot.ops[i] += adj.ops[i];
        }
    }
};

// ---------------------------------------------------------------------------
// Propagation
// ---------------------------------------------------------------------------

struct UnitaryScratch {
    std::vector<HermitianExp> exps;
    std::vector<Matrix> prefixes;  // prefixes[i] = E_{i-1} ... E_1 (prefixes[0] = I)
};

class UnitaryNode final : public Node {
  public:
    std::string name() const override { return "unitary"; }
    Value forward(const std::vector<const Value*>& in,
                  std::shared_ptr<void>& scratch) const override {
        const Series& h = as_series(*in[0], "unitary");
        const int n = static_cast<int>(h.ops.size());
        if (n == 0) throw ConfigError("unitary: empty series");
        auto ws = std::make_shared<UnitaryScratch>();
        ws->exps.reserve(static_cast<size_t>(n));
        ws->prefixes.reserve(static_cast<size_t>(n) + 1);
        const auto dim = h.ops.front().rows();
        ws->prefixes.emplace_back(Matrix::Identity(dim, dim));
        for (int i = 0; i < n; ++i) {
            ws->exps.push_back(hermitian_exp(h.ops[static_cast<size_t>(i)], h.durations[i]));
            ws->prefixes.emplace_back(ws->exps.back().unitary * ws->prefixes.back());
        }
        scratch = ws;
        return ws->prefixes.back();
    }
    void backward(const Value& out_adj, const std::vector<const Value*>& in, const Value& out,
                  const std::shared_ptr<void>& scratch,
                  const std::vector<Value*>& in_adj) const override {
        const Matrix& u_adj = std::get<Matrix>(out_adj);
        const Matrix& u = std::get<Matrix>(out);
        const auto* ws = static_cast<const UnitaryScratch*>(scratch.get());
        const Series& h = as_series(*in[0], "unitary");
        Series& h_adj = std::get<Series>(*in_adj[0]);
        const int n = static_cast<int>(h.ops.size());
        for (int i = 0; i < n; ++i) {
            // U = L_i E_i R_i with R_i = prefixes[i]; L_i = U (E_i R_i)^dag.
            const Matrix& r = ws->prefixes[static_cast<size_t>(i)];
            const Matrix& er = ws->prefixes[static_cast<size_t>(i) + 1];
            const Matrix e_adj = (er * u.adjoint()) * u_adj * r.adjoint();
            h_adj.ops[static_cast<size_t>(i)] +=
                hermitian_exp_adjoint(ws->exps[static_cast<size_t>(i)], e_adj);
        }
    }
};

class EvolveConstNode final : public Node {
  public:
    explicit EvolveConstNode(Matrix h) : h_(std::move(h)) {
        qctrlkit::require_hermitian(h_, 1e-12, "evolve_const hamiltonian");
        // Diagonal generators (always-on couplings etc.) take the fast path.
        Matrix offdiag = h_;
        offdiag.diagonal().setZero();
        diagonal_ = offdiag.cwiseAbs().maxCoeff() <=
                    1e-14 * std::max(1.0, h_.cwiseAbs().maxCoeff());
        if (!diagonal_) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(h_);
            if (es.info() != Eigen::Success) {
                throw NumericError("evolve_const: eigendecomposition failed");
            }
            vectors_ = es.eigenvectors();
            eigenvalues_ = es.eigenvalues();
        } else {
            eigenvalues_ = h_.diagonal().real();
        }
    }
    std::string name() const override { return "evolve_const"; }
    Value forward(const std::vector<const Value*>& in, std::shared_ptr<void>&) const override {
        const RealVector& tau = as_real(*in[0], "evolve_const");
        if (tau.size() != 1) throw ConfigError("evolve_const: duration must be one variable");
        Vector phases(eigenvalues_.size());
        for (Eigen::Index k = 0; k < phases.size(); ++k) {
            phases[k] = std::polar(1.0, -eigenvalues_[k] * tau[0]);
        }
        if (diagonal_) return Matrix(phases.asDiagonal());
        return Matrix(vectors_ * phases.asDiagonal() * vectors_.adjoint());
    }
    void backward(const Value& out_adj, const std::vector<const Value*>&, const Value& out,
                  const std::shared_ptr<void>&, const std::vector<Value*>& in_adj) const override {
        const Matrix& u_adj = std::get<Matrix>(out_adj);
        const Matrix& u = std::get<Matrix>(out);
        // dU/dtau = -i H U; tr(adj^dag dU) evaluated elementwise.
        Complex trace = 0.0;
        if (diagonal_) {
            for (Eigen::Index p = 0; p < u.rows(); ++p) {
                trace += std::conj(u_adj(p, p)) * Complex(0, -1) * eigenvalues_[p] * u(p, p);
            }
        } else {
            const Matrix du = Complex(0, -1) * (h_ * u);
            trace = u_adj.conjugate().cwiseProduct(du).sum();
        }
        std::get<RealVector>(*in_adj[0])[0] += 2.0 * trace.real();
    }

  private:
    Matrix h_;
    Matrix vectors_;
    RealVector eigenvalues_;
    bool diagonal_ = false;
};

struct ProductScratch {
    std::vector<Matrix> prefixes;    // prefixes[i] = in[i-1] * ... * in[0]
    std::vector<char> diagonal;      // factor i is numerically diagonal
};

// Time-ordered operator product. Interleaved free-evolution factors are
// diagonal, so factor classification keeps the prefix accumulation and the
// reverse scan at O(n^2) for those entries.
class ProductNode final : public Node {
  public:
    std::string name() const override { return "product"; }
    Value forward(const std::vector<const Value*>& in,
                  std::shared_ptr<void>& scratch) const override {
        if (in.empty()) throw ConfigError("product: needs inputs");
        const int k = static_cast<int>(in.size());
        auto ws = std::make_shared<ProductScratch>();
        const auto dim = as_matrix(*in[0], "product").rows();
        ws->prefixes.assign(static_cast<size_t>(k) + 1, Matrix());
        ws->prefixes[0] = Matrix::Identity(dim, dim);
        ws->diagonal.resize(static_cast<size_t>(k));
        for (int i = 0; i < k; ++i) {
            const Matrix& factor = as_matrix(*in[static_cast<size_t>(i)], "product");
            ws->diagonal[static_cast<size_t>(i)] = is_diagonal(factor);
            if (ws->diagonal[static_cast<size_t>(i)]) {
                ws->prefixes[static_cast<size_t>(i) + 1] =
                    factor.diagonal().asDiagonal() * ws->prefixes[static_cast<size_t>(i)];
            } else {
                ws->prefixes[static_cast<size_t>(i) + 1].noalias() =
                    factor * ws->prefixes[static_cast<size_t>(i)];
            }
        }
        scratch = ws;
        return ws->prefixes.back();
    }
    void backward(const Value& out_adj, const std::vector<const Value*>& in, const Value&,
                  const std::shared_ptr<void>& scratch,
                  const std::vector<Value*>& in_adj) const override {
        const auto* ws = static_cast<const ProductScratch*>(scratch.get());
        const int k = static_cast<int>(in.size());
        // Reverse scan: T_i = S_i^dag adj with S_i the left (later-in-time)
        // partial product, so each input adjoint is T_i prefixes[i]^dag.
        Matrix t = std::get<Matrix>(out_adj);
        for (int i = k - 1; i >= 0; --i) {
            std::get<Matrix>(*in_adj[static_cast<size_t>(i)]).noalias() +=
                t * ws->prefixes[static_cast<size_t>(i)].adjoint();
            if (i > 0) {
                const Matrix& factor = as_matrix(*in[static_cast<size_t>(i)], "product");
                if (ws->diagonal[static_cast<size_t>(i)]) {
                    t = factor.diagonal().conjugate().asDiagonal() * t;
                } else {
                    t = (factor.adjoint() * t).eval();
                }
            }
        }
    }

  private:
    static bool is_diagonal(const Matrix& m) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                if (i != j && m(i, j) != Complex(0.0, 0.0)) return false;
            }
        }
        return true;
    }
};

struct InterleavedScratch {
    std::vector<Matrix> before;  // running product before each gate factor
    std::vector<Vector> phases;  // e^{-i d tau_j} per free period
};

// G = P_m D(tau_m) ... P_1 D(tau_1) P_0 with D(tau) = exp(-i diag tau):
// decoupling products interleaved with free evolution under a constant
// diagonal coupling. Keeping the diagonal factors internal makes both passes
// O(m) dense products.
class InterleavedEvolutionNode final : public Node {
  public:
    explicit InterleavedEvolutionNode(RealVector diag) : diag_(std::move(diag)) {}
    std::string name() const override { return "interleaved_evolution"; }

    Value forward(const std::vector<const Value*>& in,
                  std::shared_ptr<void>& scratch) const override {
        if (in.size() < 2) throw ConfigError("interleaved_evolution: needs taus and gates");
        const RealVector& taus = as_real(*in[0], "interleaved_evolution");
        const int m = static_cast<int>(taus.size());
        if (static_cast<int>(in.size()) != m + 2) {
            throw ConfigError("interleaved_evolution: needs m + 1 gate factors");
        }
        const Eigen::Index n = diag_.size();
        auto ws = std::make_shared<InterleavedScratch>();
        ws->phases.resize(static_cast<size_t>(m));
        ws->before.resize(static_cast<size_t>(m) + 1);

        Matrix acc = as_matrix(*in[1], "interleaved_evolution");
        if (acc.rows() != n) throw ConfigError("interleaved_evolution: dimension mismatch");
        ws->before[0] = Matrix::Identity(n, n);
        for (int j = 0; j < m; ++j) {
            Vector phase(n);
            for (Eigen::Index p = 0; p < n; ++p) {
                phase[p] = std::polar(1.0, -diag_[p] * taus[j]);
            }
            ws->phases[static_cast<size_t>(j)] = phase;
            acc = phase.asDiagonal() * acc;
            ws->before[static_cast<size_t>(j) + 1] = acc;  // product before P_{j+1}
            acc = (as_matrix(*in[static_cast<size_t>(j) + 2], "interleaved_evolution") * acc)
                      .eval();
        }
        scratch = ws;
        return acc;
    }

    void backward(const Value& out_adj, const std::vector<const Value*>& in, const Value&,
                  const std::shared_ptr<void>& scratch,
                  const std::vector<Value*>& in_adj) const override {
        const auto* ws = static_cast<const InterleavedScratch*>(scratch.get());
        const RealVector& taus = as_real(*in[0], "interleaved_evolution");
        const int m = static_cast<int>(taus.size());
        RealVector& tau_adj = std::get<RealVector>(*in_adj[0]);

        // Reverse scan with T = (product after the factor)^dag * out_adj;
        // each factor adjoint is then T * (product before it)^dag.
        Matrix t = std::get<Matrix>(out_adj);
        for (int j = m; j >= 0; --j) {
            std::get<Matrix>(*in_adj[static_cast<size_t>(j) + 1]).noalias() +=
                t * ws->before[static_cast<size_t>(j)].adjoint();
            if (j == 0) break;
            const Matrix& p =
                as_matrix(*in[static_cast<size_t>(j) + 1], "interleaved_evolution");
            t = (p.adjoint() * t).eval();

            // Free period j: dD/dtau = -i diag D. With D_adj = T B^dag and
            // B = D^dag before[j], the phase factors cancel and
            // dC/dtau_j = 2 Re sum_p conj([T before[j]^dag]_pp) (-i d_p).
            const Matrix& with_phase = ws->before[static_cast<size_t>(j)];
            double acc = 0.0;
            for (Eigen::Index row = 0; row < t.rows(); ++row) {
                Complex diag_tw = 0.0;
                for (Eigen::Index col = 0; col < t.cols(); ++col) {
                    diag_tw += t(row, col) * std::conj(with_phase(row, col));
                }
                acc += 2.0 * std::real(std::conj(diag_tw) * Complex(0, -1) * diag_[row]);
            }
            tau_adj[static_cast<Eigen::Index>(j) - 1] += acc;

            t = ws->phases[static_cast<size_t>(j) - 1].conjugate().asDiagonal() * t;
        }
    }

  private:
    RealVector diag_;
};

class KronNode final : public Node {
  public:
    std::string name() const override { return "kron"; }
    Value forward(const std::vector<const Value*>& in, std::shared_ptr<void>&) const override {
        const Matrix& a = as_matrix(*in[0], "kron");
        const Matrix& b = as_matrix(*in[1], "kron");
        const auto p = a.rows(), q = b.rows();
        Matrix out(p * q, p * q);
        for (Eigen::Index i = 0; i < p; ++i) {
            for (Eigen::Index j = 0; j < p; ++j) {
                out.block(i * q, j * q, q, q) = a(i, j) * b;
            }
        }
        return out;
    }
    void backward(const Value& out_adj, const std::vector<const Value*>& in, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>& in_adj) const override {
        const Matrix& adj = std::get<Matrix>(out_adj);
        const Matrix& a = as_matrix(*in[0], "kron");
        const Matrix& b = as_matrix(*in[1], "kron");
        Matrix& a_adj = std::get<Matrix>(*in_adj[0]);
        Matrix& b_adj = std::get<Matrix>(*in_adj[1]);
        const auto p = a.rows(), q = b.rows();
        for (Eigen::Index i = 0; i < p; ++i) {
            for (Eigen::Index j = 0; j < p; ++j) {
                const auto block = adj.block(i * q, j * q, q, q);
                a_adj(i, j) += block.cwiseProduct(b.conjugate()).sum();
                b_adj += std::conj(a(i, j)) * block;
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

class OptimalCostNode final : public Node {
  public:
    OptimalCostNode(Matrix u_target, Projector p)
        : scaled_target_(std::move(u_target)), trace_p_(p.trace()) {
        // Pre-apply the projector: rows outside the subspace drop out of the
        // overlap Tr(U_target^dag P U).
        for (int l = 0; l < p.dimension(); ++l) {
            if (!p.entry(l)) scaled_target_.row(l).setZero();
        }
    }
    std::string name() const override { return "optimal_cost"; }
    Value forward(const std::vector<const Value*>& in, std::shared_ptr<void>&) const override {
        const Matrix& u = as_matrix(*in[0], "optimal_cost");
        const Complex z = overlap(u);
        return 1.0 - std::norm(z);
    }
    void backward(const Value& out_adj, const std::vector<const Value*>& in, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>& in_adj) const override {
        const double adj = std::get<double>(out_adj);
        const Matrix& u = as_matrix(*in[0], "optimal_cost");
        const Complex z = overlap(u);
        std::get<Matrix>(*in_adj[0]) += (-adj * z / trace_p_) * scaled_target_;
    }

  private:
    Complex overlap(const Matrix& u) const {
        return (scaled_target_.adjoint() * u).trace() / trace_p_;
    }
    Matrix scaled_target_;
    double trace_p_;
};

class StateCostNode final : public Node {
  public:
    StateCostNode(Vector psi_initial, Vector psi_target)
        : psi_i_(std::move(psi_initial)), psi_t_(std::move(psi_target)) {}
    std::string name() const override { return "state_cost"; }
    Value forward(const std::vector<const Value*>& in, std::shared_ptr<void>&) const override {
        const Matrix& u = as_matrix(*in[0], "state_cost");
        return 1.0 - std::norm(psi_t_.dot(u * psi_i_));
    }
    void backward(const Value& out_adj, const std::vector<const Value*>& in, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>& in_adj) const override {
        const double adj = std::get<double>(out_adj);
        const Matrix& u = as_matrix(*in[0], "state_cost");
        const Complex z = psi_t_.dot(u * psi_i_);
        std::get<Matrix>(*in_adj[0]) += (-adj * z) * (psi_t_ * psi_i_.adjoint());
    }

  private:
    Vector psi_i_;
    Vector psi_t_;
};

class ExpectationNode final : public Node {
  public:
    ExpectationNode(Vector psi, Matrix observable)
        : psi_(std::move(psi)), obs_(std::move(observable)) {
        qctrlkit::require_hermitian(obs_, 1e-12, "observable");
    }
    std::string name() const override { return "expectation"; }
    Value forward(const std::vector<const Value*>& in, std::shared_ptr<void>&) const override {
        const Matrix& u = as_matrix(*in[0], "expectation");
        const Vector w = u * psi_;
        return std::real(w.dot(obs_ * w));
    }
    void backward(const Value& out_adj, const std::vector<const Value*>& in, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>& in_adj) const override {
        const double adj = std::get<double>(out_adj);
        const Matrix& u = as_matrix(*in[0], "expectation");
        const Vector w = u * psi_;
        std::get<Matrix>(*in_adj[0]) += adj * ((obs_ * w) * psi_.adjoint());
    }

  private:
    Vector psi_;
    Matrix obs_;
};

// ---------------------------------------------------------------------------
// Filter-function cost (differentiable toggling-frame transform)
// ---------------------------------------------------------------------------

struct FilterScratch {
    std::vector<Matrix> w;             // accumulated control propagators, one per sample
    std::vector<HermitianExp> seg_exp; // per input segment
    std::vector<int> sample_segment;   // sample index -> segment index
};

class FilterCostNode final : public Node {
  public:
    FilterCostNode(Matrix noise_op, Projector p, int samples, std::vector<double> freqs,
                   std::vector<double> weights)
        : noise_op_(std::move(noise_op)),
          projector_(std::move(p)),
          samples_(samples),
          freqs_(std::move(freqs)),
          weights_(std::move(weights)) {
        if (samples_ < 2) throw ConfigError("filter_cost: need at least 2 samples");
        if (freqs_.size() != weights_.size() || freqs_.empty()) {
            throw ConfigError("filter_cost: frequency/weight mismatch");
        }
        qctrlkit::require_hermitian(noise_op_, 1e-12, "filter_cost noise operator");
    }
    std::string name() const override { return "filter_cost"; }

    Value forward(const std::vector<const Value*>& in,
                  std::shared_ptr<void>& scratch) const override {
        const Series& h = as_series(*in[0], "filter_cost");
        auto ws = std::make_shared<FilterScratch>();
        build(h, *ws);
        double cost = 0.0;
        const double dt = sample_dt(h);
        for (size_t nu = 0; nu < freqs_.size(); ++nu) {
            const Matrix g = transform(*ws, dt, freqs_[nu]);
            cost += weights_[nu] * filter_value(g);
        }
        scratch = ws;
        return cost;
    }

    void backward(const Value& out_adj, const std::vector<const Value*>& in, const Value&,
                  const std::shared_ptr<void>& scratch,
                  const std::vector<Value*>& in_adj) const override {
        const double adj = std::get<double>(out_adj);
        const Series& h = as_series(*in[0], "filter_cost");
        Series& h_adj = std::get<Series>(*in_adj[0]);
        const auto* ws = static_cast<const FilterScratch*>(scratch.get());
        const double dt = sample_dt(h);
        const int dim = static_cast<int>(noise_op_.rows());
        const double trace_p = projector_.trace();

        // Adjoints of the traceless toggled samples, accumulated over all
        // probe frequencies.
        std::vector<Matrix> np_adj(static_cast<size_t>(samples_), Matrix::Zero(dim, dim));
        for (size_t nu = 0; nu < freqs_.size(); ++nu) {
            const Matrix g = transform(*ws, dt, freqs_[nu]);
            Matrix g_adj = g;
            for (int l = 0; l < dim; ++l) {
                if (!projector_.entry(l)) g_adj.row(l).setZero();
            }
            g_adj *= adj * weights_[nu] / trace_p;
            for (int i = 0; i < samples_; ++i) {
                const double w = (i == 0 || i == samples_ - 1) ? 0.5 : 1.0;
                const Complex a = std::conj(std::polar(dt * w, freqs_[nu] * i * dt));
                np_adj[static_cast<size_t>(i)] += a * g_adj;
            }
        }

        // Reverse scan through the propagator recursion W_{i+1} = U_i W_i.
        Matrix w_adj = Matrix::Zero(dim, dim);
        std::vector<Matrix> e_adj(ws->seg_exp.size(), Matrix::Zero(dim, dim));
        for (int i = samples_ - 1; i >= 0; --i) {
            const Matrix& w = ws->w[static_cast<size_t>(i)];
            if (i < samples_ - 1) {
                // w_adj currently holds the adjoint of W_{i+1}.
                const int seg = ws->sample_segment[static_cast<size_t>(i)];
                e_adj[static_cast<size_t>(seg)] += w_adj * w.adjoint();
                w_adj = ws->seg_exp[static_cast<size_t>(seg)].unitary.adjoint() * w_adj;
            }
            // Direct contribution through N~_i = W_i^dag N W_i with the
            // traceless projection folded into n_adj.
            Matrix n_adj = np_adj[static_cast<size_t>(i)];
            Complex tr = 0.0;
            for (int l = 0; l < dim; ++l) tr += n_adj(l, l);
            Matrix masked = Matrix::Zero(dim, dim);
            for (int l = 0; l < dim; ++l) {
                if (projector_.entry(l)) masked(l, l) = tr / trace_p;
            }
            n_adj -= masked;
            w_adj += noise_op_.adjoint() * w * n_adj + noise_op_ * w * n_adj.adjoint();
        }
        for (size_t seg = 0; seg < e_adj.size(); ++seg) {
            if (e_adj[seg].isZero(0.0)) continue;
            h_adj.ops[seg] += hermitian_exp_adjoint(ws->seg_exp[seg], e_adj[seg]);
        }
    }

  private:
    double sample_dt(const Series& h) const { return h.durations.sum() / (samples_ - 1); }

    void build(const Series& h, FilterScratch& ws) const {
        const int dim = static_cast<int>(noise_op_.rows());
        if (h.ops.front().rows() != dim) throw ConfigError("filter_cost: dimension mismatch");
        const double tau = h.durations.sum();
        const double dt = sample_dt(h);

        ws.seg_exp.reserve(h.ops.size());
        for (const Matrix& op : h.ops) ws.seg_exp.push_back(hermitian_exp(op, dt));

        ws.sample_segment.resize(static_cast<size_t>(samples_));
        std::vector<double> ends(h.ops.size());
        double acc = 0.0;
        for (size_t s = 0; s < h.ops.size(); ++s) {
            acc += h.durations[static_cast<Eigen::Index>(s)];
            ends[s] = acc;
        }
        size_t seg = 0;
        for (int i = 0; i < samples_; ++i) {
            const double t = std::min(i * dt, tau);
            while (seg + 1 < ends.size() && t >= ends[seg]) ++seg;
            ws.sample_segment[static_cast<size_t>(i)] = static_cast<int>(seg);
        }

        ws.w.reserve(static_cast<size_t>(samples_));
        Matrix w = Matrix::Identity(dim, dim);
        for (int i = 0; i < samples_; ++i) {
            ws.w.push_back(w);
            if (i + 1 < samples_) {
                w = ws.seg_exp[static_cast<size_t>(ws.sample_segment[static_cast<size_t>(i)])]
                        .unitary *
                    w;
            }
        }
    }

    // Trapezoid DTFT of the traceless toggled noise operator.
    Matrix transform(const FilterScratch& ws, double dt, double omega) const {
        const int dim = static_cast<int>(noise_op_.rows());
        const double trace_p = projector_.trace();
        Matrix g = Matrix::Zero(dim, dim);
        for (int i = 0; i < samples_; ++i) {
            const Matrix& w = ws.w[static_cast<size_t>(i)];
            Matrix toggled = w.adjoint() * noise_op_ * w;
            Complex tr = 0.0;
            for (int l = 0; l < dim; ++l) {
                if (projector_.entry(l)) tr += toggled(l, l);
            }
            toggled -= (tr / trace_p) * Matrix::Identity(dim, dim);
            const double wgt = (i == 0 || i == samples_ - 1) ? 0.5 : 1.0;
            g += (wgt * std::polar(dt, omega * i * dt)) * toggled;
        }
        return g;
    }

    double filter_value(const Matrix& g) const {
        double f = 0.0;
        for (int l = 0; l < g.rows(); ++l) {
            if (!projector_.entry(l)) continue;
            for (int q = 0; q < g.cols(); ++q) f += std::norm(g(l, q));
        }
        return f / projector_.trace();
    }

    Matrix noise_op_;
    Projector projector_;
    int samples_;
    std::vector<double> freqs_;
    std::vector<double> weights_;
};

// ---------------------------------------------------------------------------
// Scalar reductions
// ---------------------------------------------------------------------------

class DurationPenaltyNode final : public Node {
  public:
    DurationPenaltyNode(double tau_max, double weight) : tau_max_(tau_max), weight_(weight) {}
    std::string name() const override { return "duration_penalty"; }
    Value forward(const std::vector<const Value*>& in, std::shared_ptr<void>&) const override {
        const RealVector& tau = as_real(*in[0], "duration_penalty");
        const double excess = std::max(0.0, tau.sum() - tau_max_);
        return weight_ * excess * excess;
    }
    void backward(const Value& out_adj, const std::vector<const Value*>& in, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>& in_adj) const override {
        const double adj = std::get<double>(out_adj);
        const RealVector& tau = as_real(*in[0], "duration_penalty");
        const double excess = std::max(0.0, tau.sum() - tau_max_);
        if (excess > 0.0) {
            std::get<RealVector>(*in_adj[0]).array() += adj * 2.0 * weight_ * excess;
        }
    }

  private:
    double tau_max_;
    double weight_;
};

class SumSquaresNode final : public Node {
  public:
    SumSquaresNode(RealVector targets, RealVector weights)
        : targets_(std::move(targets)), weights_(std::move(weights)) {
        if (targets_.size() != weights_.size()) {
            throw ConfigError("sum_squares: target/weight mismatch");
        }
    }
    std::string name() const override { return "sum_squares"; }
    Value forward(const std::vector<const Value*>& in, std::shared_ptr<void>&) const override {
        const RealVector& x = as_real(*in[0], "sum_squares");
        if (x.size() != targets_.size()) throw ConfigError("sum_squares: length mismatch");
        return (weights_.array() * (x - targets_).array().square()).sum();
    }
    void backward(const Value& out_adj, const std::vector<const Value*>& in, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>& in_adj) const override {
        const double adj = std::get<double>(out_adj);
        const RealVector& x = as_real(*in[0], "sum_squares");
        std::get<RealVector>(*in_adj[0]) +=
            adj * 2.0 * (weights_.array() * (x - targets_).array()).matrix();
    }

  private:
    RealVector targets_;
    RealVector weights_;
};

class SumEntriesNode final : public Node {
  public:
    std::string name() const override { return "sum_entries"; }
    Value forward(const std::vector<const Value*>& in, std::shared_ptr<void>&) const override {
        return as_real(*in[0], "sum_entries").sum();
    }
    void backward(const Value& out_adj, const std::vector<const Value*>&, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>& in_adj) const override {
        std::get<RealVector>(*in_adj[0]).array() += std::get<double>(out_adj);
    }
};

class WeightedSumNode final : public Node {
  public:
    explicit WeightedSumNode(RealVector weights) : weights_(std::move(weights)) {}
    std::string name() const override { return "weighted_sum"; }
    Value forward(const std::vector<const Value*>& in, std::shared_ptr<void>&) const override {
        if (static_cast<Eigen::Index>(in.size()) != weights_.size()) {
            throw ConfigError("weighted_sum: input/weight mismatch");
        }
        double out = 0.0;
        for (size_t i = 0; i < in.size(); ++i) {
            out += weights_[static_cast<Eigen::Index>(i)] * as_scalar(*in[i], "weighted_sum");
        }
        return out;
    }
    void backward(const Value& out_adj, const std::vector<const Value*>&, const Value&,
                  const std::shared_ptr<void>&, const std::vector<Value*>& in_adj) const override {
        const double adj = std::get<double>(out_adj);
        for (size_t i = 0; i < in_adj.size(); ++i) {
            std::get<double>(*in_adj[i]) += adj * weights_[static_cast<Eigen::Index>(i)];
        }
    }

  private:
    RealVector weights_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Graph engine
// ---------------------------------------------------------------------------

CostGraph::CostGraph(int variable_count) : n_vars_(variable_count) {
    if (variable_count < 1) throw ConfigError("cost graph needs at least one variable");
    entries_.push_back(Entry{std::make_unique<VariablesNode>(), {}});
}

int CostGraph::add(std::unique_ptr<Node> node, std::vector<int> inputs) {
    for (int id : inputs) {
        if (id < 0 || id >= static_cast<int>(entries_.size())) {
            throw ConfigError("cost graph: node input id out of range (graph must be acyclic)");
        }
    }
    entries_.push_back(Entry{std::move(node), std::move(inputs)});
    output_ = static_cast<int>(entries_.size()) - 1;
    return output_;
}

void CostGraph::set_output(int node_id) {
    if (node_id < 1 || node_id >= static_cast<int>(entries_.size())) {
        throw ConfigError("cost graph: bad output node");
    }
    output_ = node_id;
}

void CostGraph::run_forward(const RealVector& v, std::vector<Value>& values,
                            std::vector<std::shared_ptr<void>>& scratch) const {
    if (v.size() != n_vars_) throw ConfigError("cost graph: variable count mismatch");
    if (output_ < 1) throw ConfigError("cost graph: no output node");
    values.resize(entries_.size());
    scratch.assign(entries_.size(), nullptr);
    values[0] = v;
    std::vector<const Value*> in;
    for (size_t k = 1; k < entries_.size(); ++k) {
        in.clear();
        for (int id : entries_[k].inputs) in.push_back(&values[static_cast<size_t>(id)]);
        values[k] = entries_[k].node->forward(in, scratch[k]);
    }
}

double CostGraph::value(const RealVector& v) const {
    std::vector<Value> values;
    std::vector<std::shared_ptr<void>> scratch;
    run_forward(v, values, scratch);
    const auto* out = std::get_if<double>(&values[static_cast<size_t>(output_)]);
    if (out == nullptr) throw ConfigError("cost graph: output node is not scalar");
    return *out;
}

Value CostGraph::node_value(const RealVector& v, int node_id) const {
    if (node_id < 0 || node_id >= static_cast<int>(entries_.size())) {
        throw ConfigError("cost graph: bad node id");
    }
    std::vector<Value> values;
    std::vector<std::shared_ptr<void>> scratch;
    run_forward(v, values, scratch);
    return values[static_cast<size_t>(node_id)];
}

double CostGraph::value_and_gradient(const RealVector& v, RealVector& grad) const {
    std::vector<Value> values;
    std::vector<std::shared_ptr<void>> scratch;
    run_forward(v, values, scratch);
    const auto* out = std::get_if<double>(&values[static_cast<size_t>(output_)]);
    if (out == nullptr) throw ConfigError("cost graph: output node is not scalar");

    std::vector<Value> adjoints(entries_.size());
    for (size_t k = 0; k < entries_.size(); ++k) adjoints[k] = zero_like(values[k]);
    adjoints[static_cast<size_t>(output_)] = 1.0;

    std::vector<const Value*> in;
    std::vector<Value*> in_adj;
    for (size_t k = entries_.size(); k-- > 1;) {
        // Skip nodes that cannot influence the output (zero adjoint scalars
        // still propagate cheaply; matrices are worth skipping).
        in.clear();
        in_adj.clear();
        for (int id : entries_[k].inputs) {
            in.push_back(&values[static_cast<size_t>(id)]);
            in_adj.push_back(&adjoints[static_cast<size_t>(id)]);
        }
        entries_[k].node->backward(adjoints[k], in, values[k], scratch[k], in_adj);
    }
    grad = std::get<RealVector>(adjoints[0]);
    return *out;
}

// ---------------------------------------------------------------------------
// Node factories
// ---------------------------------------------------------------------------

std::unique_ptr<Node> make_slice(int offset, int length) {
    return std::make_unique<SliceNode>(offset, length);
}
std::unique_ptr<Node> make_const_real(RealVector values) {
    return std::make_unique<ConstRealNode>(std::move(values));
}
std::unique_ptr<Node> make_const_matrix(Matrix m) {
    return std::make_unique<ConstMatrixNode>(std::move(m));
}
std::unique_ptr<Node> make_affine(double scale, double shift) {
    return std::make_unique<AffineNode>(scale, shift);
}
std::unique_ptr<Node> make_mask(RealVector binary_mask) {
    return std::make_unique<MaskNode>(std::move(binary_mask));
}
std::unique_ptr<Node> make_symmetrize() { return std::make_unique<SymmetrizeNode>(); }
std::unique_ptr<Node> make_linear_map(RealMatrix w) {
    return std::make_unique<LinearMapNode>(std::move(w));
}
std::unique_ptr<Node> make_concat() { return std::make_unique<ConcatNode>(); }
std::unique_ptr<Node> make_polar() { return std::make_unique<PolarNode>(); }
std::unique_ptr<Node> make_cartesian() { return std::make_unique<CartesianNode>(); }

std::unique_ptr<Node> make_drive_series(Matrix op, RealVector durations) {
    return std::make_unique<DriveSeriesNode>(std::move(op), std::move(durations));
}
std::unique_ptr<Node> make_shift_series(Matrix op, RealVector durations) {
    return std::make_unique<ShiftSeriesNode>(std::move(op), std::move(durations));
}
std::unique_ptr<Node> make_scaled_pwc(RealVector base_values) {
    return std::make_unique<ScaledPwcNode>(std::move(base_values));
}
std::unique_ptr<Node> make_const_series(Series s) {
    return std::make_unique<ConstSeriesNode>(std::move(s));
}
std::unique_ptr<Node> make_sum_series() { return std::make_unique<SumSeriesNode>(); }

std::unique_ptr<Node> make_unitary() { return std::make_unique<UnitaryNode>(); }
std::unique_ptr<Node> make_evolve_const(Matrix hamiltonian) {
    return std::make_unique<EvolveConstNode>(std::move(hamiltonian));
}
std::unique_ptr<Node> make_product() { return std::make_unique<ProductNode>(); }
std::unique_ptr<Node> make_interleaved_evolution(RealVector diagonal) {
    return std::make_unique<InterleavedEvolutionNode>(std::move(diagonal));
}
std::unique_ptr<Node> make_kron() { return std::make_unique<KronNode>(); }

std::unique_ptr<Node> make_optimal_cost(Matrix u_target, Projector p) {
    return std::make_unique<OptimalCostNode>(std::move(u_target), std::move(p));
}
std::unique_ptr<Node> make_state_cost(Vector psi_initial, Vector psi_target) {
    return std::make_unique<StateCostNode>(std::move(psi_initial), std::move(psi_target));
}
std::unique_ptr<Node> make_expectation(Vector psi, Matrix observable) {
    return std::make_unique<ExpectationNode>(std::move(psi), std::move(observable));
}

std::unique_ptr<Node> make_filter_cost(Matrix noise_op, Projector p, int samples,
                                       std::vector<double> frequencies,
                                       std::vector<double> weights) {
    return std::make_unique<FilterCostNode>(std::move(noise_op), std::move(p), samples,
                                            std::move(frequencies), std::move(weights));
}

std::unique_ptr<Node> make_quasi_static_cost(Matrix noise_op, Projector p, int samples) {
    return make_filter_cost(std::move(noise_op), std::move(p), samples, {0.0},
                            {1.0 / (2.0 * kPi)});
}

std::unique_ptr<Node> make_fixed_freq_cost(Matrix noise_op, Projector p, int samples,
                                           double omega) {
    return make_filter_cost(std::move(noise_op), std::move(p), samples, {omega},
                            {1.0 / (2.0 * kPi)});
}

std::unique_ptr<Node> make_band_cost(Matrix noise_op, Projector p, int samples,
                                     double omega_lo, double omega_hi, int grid_points,
                                     RealVector psd_samples) {
    if (grid_points < 2) throw ConfigError("band_cost: need at least 2 grid points");
    if (psd_samples.size() != grid_points) {
        throw ConfigError("band_cost: psd sample count must match grid points");
    }
    if (!(omega_hi > omega_lo)) throw ConfigError("band_cost: empty band");
    const double d_omega = (omega_hi - omega_lo) / (grid_points - 1);
    std::vector<double> freqs(static_cast<size_t>(grid_points));
    std::vector<double> weights(static_cast<size_t>(grid_points));
    for (int i = 0; i < grid_points; ++i) {
        freqs[static_cast<size_t>(i)] = omega_lo + i * d_omega;
        const double trap = (i == 0 || i == grid_points - 1) ? 0.5 : 1.0;
        weights[static_cast<size_t>(i)] = trap * psd_samples[i] * d_omega / (2.0 * kPi);
    }
    return make_filter_cost(std::move(noise_op), std::move(p), samples, std::move(freqs),
                            std::move(weights));
}

std::unique_ptr<Node> make_duration_penalty(double tau_max, double weight) {
    return std::make_unique<DurationPenaltyNode>(tau_max, weight);
}
std::unique_ptr<Node> make_sum_squares(RealVector targets, RealVector weights) {
    return std::make_unique<SumSquaresNode>(std::move(targets), std::move(weights));
}
std::unique_ptr<Node> make_sum_entries() { return std::make_unique<SumEntriesNode>(); }
std::unique_ptr<Node> make_weighted_sum(RealVector weights) {
    return std::make_unique<WeightedSumNode>(std::move(weights));
}

// ---------------------------------------------------------------------------
// Kernel and basis matrices
// ---------------------------------------------------------------------------

namespace {

// Sine integral Si(x) = int_0^x sin(t)/t dt. Gauss-Legendre summation per
// pi-interval below the crossover, asymptotic auxiliary functions above;
// absolute accuracy is better than 1e-9 everywhere.
double sine_integral(double x) {
    static constexpr double kNodes[8] = {0.0950125098376374, 0.2816035507792589,
                                         0.4580167776572274, 0.6178762444026438,
                                         0.7554044083550030, 0.8656312023878318,
                                         0.9445750230732326, 0.9894009349916499};
    static constexpr double kWeights[8] = {0.1894506104550685, 0.1826034150449236,
                                           0.1691565193950025, 0.1495959888165767,
                                           0.1246289712555339, 0.0951585116824928,
                                           0.0622535239386479, 0.0271524594117541};
    const double ax = std::abs(x);
    double result;
    if (ax <= 50.0) {
        auto sinc_t = [](double t) { return t == 0.0 ? 1.0 : std::sin(t) / t; };
        result = 0.0;
        const int intervals = static_cast<int>(std::ceil(ax / kPi));
        for (int k = 0; k < intervals; ++k) {
            const double a = k * kPi;
            const double b = std::min(ax, (k + 1) * kPi);
            const double c = 0.5 * (a + b);
            const double h = 0.5 * (b - a);
            double acc = 0.0;
            for (int j = 0; j < 8; ++j) {
                acc += kWeights[j] * (sinc_t(c + h * kNodes[j]) + sinc_t(c - h * kNodes[j]));
            }
            result += h * acc;
        }
    } else {
        // f(x) ~ (1/x)(1 - 2!/x^2 + 4!/x^4 - ...), g(x) ~ (1/x^2)(1 - 3!/x^2 + ...)
        const double ix2 = 1.0 / (ax * ax);
        const double f =
            (1.0 / ax) * (1.0 - ix2 * (2.0 - ix2 * (24.0 - ix2 * (720.0 - ix2 * 40320.0))));
        const double g =
            ix2 * (1.0 - ix2 * (6.0 - ix2 * (120.0 - ix2 * (5040.0 - ix2 * 362880.0))));
        result = 0.5 * kPi - f * std::cos(ax) - g * std::sin(ax);
    }
    return x < 0.0 ? -result : result;
}

}  // namespace

RealMatrix lti_filter_matrix(FilterKernel kernel, double cutoff, double tau, int n_in,
                             int n_out) {
    if (n_in < 1 || n_out < 1 || !(tau > 0.0)) throw ConfigError("lti_filter: bad layout");
    if (!(cutoff > 0.0)) throw ConfigError("lti_filter: kernel cutoff must be positive");
    const double dt_in = tau / n_in;
    const double dt_out = tau / n_out;
    RealMatrix w(n_out, n_in);

    // Integral of the kernel over [0, t] (causal RC) or [-inf, t] (sinc).
    auto kernel_cdf = [&](double t) -> double {
        if (kernel == FilterKernel::RC) {
            return t <= 0.0 ? 0.0 : 1.0 - std::exp(-cutoff * t);
        }
        return 0.5 + sine_integral(cutoff * t) / kPi;
    };

    for (int i = 0; i < n_out; ++i) {
        const double t = (i + 0.5) * dt_out;  // sample at output midpoints
        for (int j = 0; j < n_in; ++j) {
            const double a = j * dt_in;
            const double b = a + dt_in;
            // integral over s in [a, b] of K(t - s) ds
            w(i, j) = kernel_cdf(t - a) - kernel_cdf(t - b);
        }
    }
    return w;
}

RealMatrix lti_filter_matrix_from_samples(const RealVector& kernel_values, double kernel_dt,
                                          double tau, int n_in, int n_out) {
    if (kernel_values.size() < 1 || !(kernel_dt > 0.0)) {
        throw ConfigError("lti_filter: empty kernel");
    }
    double norm = kernel_values.sum() * kernel_dt;
    if (!(std::abs(norm) > 0.0)) throw ConfigError("lti_filter: kernel is not normalizable");

    const double dt_in = tau / n_in;
    const double dt_out = tau / n_out;
    RealMatrix w = RealMatrix::Zero(n_out, n_in);
    const int nk = static_cast<int>(kernel_values.size());
    for (int i = 0; i < n_out; ++i) {
        const double t = (i + 0.5) * dt_out;
        for (int j = 0; j < n_in; ++j) {
            const double a = j * dt_in;
            const double b = a + dt_in;
            // overlap of the kernel support [t - b, t - a] with each kernel cell
            double acc = 0.0;
            for (int k = 0; k < nk; ++k) {
                const double ka = k * kernel_dt;
                const double kb = ka + kernel_dt;
                const double lo = std::max(ka, t - b);
                const double hi = std::min(kb, t - a);
                if (hi > lo) acc += kernel_values[k] * (hi - lo);
            }
            w(i, j) = acc / norm;
        }
    }
    return w;
}

RealMatrix crab_fourier_basis(int n_basis, double tau, int n_out) {
    std::vector<double> freqs;
    freqs.reserve(static_cast<size_t>(n_basis));
    for (int b = 0; b < n_basis; ++b) {
        freqs.push_back(2.0 * kPi * (b / 2 + 1) / tau);
    }
    RealMatrix w(n_out, n_basis);
    for (int i = 0; i < n_out; ++i) {
        const double t = (i + 0.5) * tau / n_out;
        for (int b = 0; b < n_basis; ++b) {
            w(i, b) = (b % 2 == 0) ? std::sin(freqs[static_cast<size_t>(b)] * t)
                                   : std::cos(freqs[static_cast<size_t>(b)] * t);
        }
    }
    return w;
}

RealMatrix crab_basis_from_frequencies(const std::vector<double>& frequencies, double tau,
                                       int n_out) {
    RealMatrix w(n_out, static_cast<Eigen::Index>(frequencies.size()));
    for (int i = 0; i < n_out; ++i) {
        const double t = (i + 0.5) * tau / n_out;
        for (size_t b = 0; b < frequencies.size(); ++b) {
            w(i, static_cast<Eigen::Index>(b)) = std::sin(frequencies[b] * t);
        }
    }
    return w;
}

}  // namespace qctrlkit::graph
