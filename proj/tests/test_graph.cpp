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

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qctrlkit/control.hpp"
#include "qctrlkit/graph.hpp"
#include "qctrlkit/ops.hpp"
#include "qctrlkit/rng.hpp"

using namespace qctrlkit;
namespace g = qctrlkit::graph;

namespace {
constexpr double kPi = std::numbers::pi;

RealVector random_vector(int n, uint64_t seed, double scale = 1.0) {
    RngStream rng(seed);
    RealVector v(n);
    for (int i = 0; i < n; ++i) v[i] = scale * rng.normal();
    return v;
}

// Central finite differences with relative step 1e-6; agreement required to
// 1e-5 relative on every coordinate. The additive floor covers the roundoff
// noise of the difference quotient itself, ~eps |f| / h.
void check_gradient(const g::CostGraph& graph, const RealVector& v, double rel_tol = 1e-5) {
    RealVector grad;
    const double f0 = graph.value_and_gradient(v, grad);
    CHECK(std::isfinite(f0));
    for (int i = 0; i < v.size(); ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(v[i]));
        RealVector vp = v;
        vp[i] += h;
        RealVector vm = v;
        vm[i] -= h;
        const double fd = (graph.value(vp) - graph.value(vm)) / (2.0 * h);
        const double scale = std::max(std::abs(fd), std::abs(grad[i]));
        const double fd_noise = 1e-14 * (1.0 + std::abs(f0)) / h;
        CHECK(std::abs(fd - grad[i]) <= rel_tol * scale + fd_noise);
    }
}

Matrix random_nonhermitian(int n, uint64_t seed) {
    RngStream rng(seed);
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = Complex(rng.normal(), rng.normal());
    return m;
}

Matrix random_hermitian(int n, uint64_t seed) {
    const Matrix m = random_nonhermitian(n, seed);
    return 0.5 * (m + m.adjoint());
}

Matrix random_unitary(int n, uint64_t seed) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(random_hermitian(n, seed));
    Vector phases(n);
    for (int k = 0; k < n; ++k) phases[k] = std::polar(1.0, -es.eigenvalues()[k]);
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

TEST_CASE("constant graph has zero gradient") {
    g::CostGraph cg(3);
    const int c = cg.add(g::make_const_real(RealVector::Ones(2)), {});
    const int s = cg.add(g::make_sum_entries(), {c});
    cg.set_output(s);
    RealVector grad;
    const double f = cg.value_and_gradient(RealVector::Zero(3), grad);
    CHECK(f == doctest::Approx(2.0));
    CHECK(grad.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("quadratic cost gradient is 2v") {
    const int n = 5;
    g::CostGraph cg(n);
    const int all = cg.add(g::make_slice(0, n), {0});
    cg.add(g::make_sum_squares(RealVector::Zero(n), RealVector::Ones(n)), {all});
    const RealVector v = random_vector(n, 1);
    RealVector grad;
    const double f = cg.value_and_gradient(v, grad);
    CHECK(f == doctest::Approx(v.squaredNorm()));
    CHECK((grad - 2.0 * v).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("signal shaping nodes") {
    SUBCASE("symmetrize mirrors the first half") {
        g::CostGraph cg(3);
        const int all = cg.add(g::make_slice(0, 3), {0});
        const int sym = cg.add(g::make_symmetrize(), {all});
        cg.add(g::make_sum_squares(RealVector::Zero(6), random_vector(6, 2).cwiseAbs()),
               {sym});
        RealVector v(3);
        v << 1.0, 2.0, 3.0;
        const g::Value out = cg.node_value(v, sym);
        const RealVector& mirrored = std::get<RealVector>(out);
        RealVector expected(6);
        expected << 1.0, 2.0, 3.0, 3.0, 2.0, 1.0;
        CHECK((mirrored - expected).cwiseAbs().maxCoeff() == 0.0);
        check_gradient(cg, v);
    }

    SUBCASE("mask zeroes values and gradients") {
        const int n = 4;
        RealVector mask(n);
        mask << 1.0, 0.0, 1.0, 0.0;
        g::CostGraph cg(n);
        const int all = cg.add(g::make_slice(0, n), {0});
        const int masked = cg.add(g::make_mask(mask), {all});
        cg.add(g::make_sum_squares(RealVector::Ones(n), RealVector::Ones(n)), {masked});

        const RealVector v = random_vector(n, 3);
        RealVector grad;
        cg.value_and_gradient(v, grad);
        CHECK(grad[1] == 0.0);
        CHECK(grad[3] == 0.0);
        // masked coordinates never change the cost
        RealVector v2 = v;
        v2[1] += 10.0;
        v2[3] -= 5.0;
        CHECK(cg.value(v2) == doctest::Approx(cg.value(v)).epsilon(1e-14));
        // all-ones mask is the identity
        g::CostGraph cid(n);
        const int a2 = cid.add(g::make_slice(0, n), {0});
        const int m2 = cid.add(g::make_mask(RealVector::Ones(n)), {a2});
        cid.add(g::make_sum_squares(RealVector::Ones(n), RealVector::Ones(n)), {m2});
        CHECK(cid.value(v) == doctest::Approx((v.array() - 1.0).square().sum()));
    }

    SUBCASE("polar and cartesian assembly gradients") {
        const int n = 3;
        g::CostGraph cg(2 * n);
        const int mod = cg.add(g::make_slice(0, n), {0});
        const int phase = cg.add(g::make_slice(n, n), {0});
        const int gamma = cg.add(g::make_polar(), {mod, phase});
        const int drv =
            cg.add(g::make_drive_series(random_nonhermitian(3, 7), RealVector::Ones(n) / n),
                   {gamma});
        const int u = cg.add(g::make_unitary(), {drv});
        cg.add(g::make_optimal_cost(random_unitary(3, 8), Projector::full(3)), {u});
        for (uint64_t s = 0; s < 5; ++s) {
            RealVector v = random_vector(2 * n, 50 + s);
            v.head(n) = v.head(n).cwiseAbs();  // moduli nonnegative
            check_gradient(cg, v);
        }

        g::CostGraph cc(2 * n);
        const int re = cc.add(g::make_slice(0, n), {0});
        const int im = cc.add(g::make_slice(n, n), {0});
        const int gamma2 = cc.add(g::make_cartesian(), {re, im});
        const int drv2 =
            cc.add(g::make_drive_series(random_nonhermitian(3, 9), RealVector::Ones(n) / n),
                   {gamma2});
        const int u2 = cc.add(g::make_unitary(), {drv2});
        cc.add(g::make_optimal_cost(random_unitary(3, 10), Projector::full(3)), {u2});
        for (uint64_t s = 0; s < 5; ++s) check_gradient(cc, random_vector(2 * n, 70 + s));
    }
}

TEST_CASE("real drive pulse gradient") {
    const int m = 4;
    g::CostGraph cg(m);
    const int a = cg.add(g::make_slice(0, m), {0});
    const int series =
        cg.add(g::make_drive_series(random_nonhermitian(2, 77), RealVector::Constant(m, 0.25)),
               {a});
    const int u = cg.add(g::make_unitary(), {series});
    cg.add(g::make_optimal_cost(random_unitary(2, 78), Projector::full(2)), {u});
    for (uint64_t s = 0; s < 5; ++s) check_gradient(cg, random_vector(m, 400 + s));
}

TEST_CASE("propagation nodes") {
    SUBCASE("unitary node gradient") {
        const int segments = 4;
        g::CostGraph cg(segments);
        const int alpha = cg.add(g::make_slice(0, segments), {0});
        const int series = cg.add(
            g::make_shift_series(random_hermitian(3, 11), RealVector::Ones(segments) * 0.25),
            {alpha});
        const int u = cg.add(g::make_unitary(), {series});
        cg.add(g::make_optimal_cost(random_unitary(3, 12), Projector::full(3)), {u});
        for (uint64_t s = 0; s < 5; ++s) check_gradient(cg, random_vector(segments, 90 + s));
    }

    SUBCASE("evolve_const, product and kron gradients") {
        // cost through kron(U_a(t1), U_b(t2)) * evolve(t3) with a state cost
        const Matrix ha = random_hermitian(2, 13);
        const Matrix hb = random_hermitian(2, 14);
        const Matrix hc = random_hermitian(4, 15);
        g::CostGraph cg(3);
        const int t1 = cg.add(g::make_slice(0, 1), {0});
        const int t2 = cg.add(g::make_slice(1, 1), {0});
        const int t3 = cg.add(g::make_slice(2, 1), {0});
        const int ua = cg.add(g::make_evolve_const(ha), {t1});
        const int ub = cg.add(g::make_evolve_const(hb), {t2});
        const int uk = cg.add(g::make_kron(), {ua, ub});
        const int uc = cg.add(g::make_evolve_const(hc), {t3});
        const int prod = cg.add(g::make_product(), {uk, uc});
        Vector psi0 = Vector::Zero(4);
        psi0[0] = 1.0;
        Vector target(4);
        target << 0.5, 0.5, 0.5, Complex(0.0, 0.5);
        cg.add(g::make_state_cost(psi0, target), {prod});
        for (uint64_t s = 0; s < 8; ++s) {
            check_gradient(cg, random_vector(3, 110 + s).cwiseAbs());
        }
    }

    SUBCASE("interleaved evolution gradient") {
        // taus (2) + two 2x2 gate-factor angles (2): G = P1 D(t2) P0 ... with
        // P_j = exp(-i theta_j sigma_x)
        RealVector diag(2);
        diag << 0.7, -1.3;
        g::CostGraph cg(4);
        const int taus = cg.add(g::make_slice(0, 2), {0});
        std::vector<int> gates;
        for (int j = 0; j < 3; ++j) {
            const int theta = cg.add(g::make_slice(2 + (j % 2), 1), {0});
            gates.push_back(cg.add(g::make_evolve_const(ops::sigma_x()), {theta}));
        }
        const int g_out = cg.add(g::make_interleaved_evolution(diag),
                                 {taus, gates[0], gates[1], gates[2]});
        cg.add(g::make_optimal_cost(random_unitary(2, 91), Projector::full(2)), {g_out});
        for (uint64_t s = 0; s < 10; ++s) {
            check_gradient(cg, random_vector(4, 500 + s).cwiseAbs());
        }
    }

    SUBCASE("expectation node gradient") {
        g::CostGraph cg(2);
        const int alpha = cg.add(g::make_slice(0, 2), {0});
        const int series =
            cg.add(g::make_shift_series(random_hermitian(2, 16), RealVector::Ones(2) * 0.5),
                   {alpha});
        const int u = cg.add(g::make_unitary(), {series});
        Vector psi(2);
        psi << 1.0, 0.0;
        cg.add(g::make_expectation(psi, ops::sigma_z()), {u});
        for (uint64_t s = 0; s < 5; ++s) check_gradient(cg, random_vector(2, 130 + s));
    }
}

TEST_CASE("lti filter kernels") {
    SUBCASE("near-delta sinc kernel is the identity map") {
        const int m = 16;
        const double tau = 1.0;
        const RealMatrix w =
            g::lti_filter_matrix(g::FilterKernel::Sinc, 1e8 / tau, tau, m, m);
        const RealVector x = random_vector(m, 17);
        CHECK(((w * x) - x).cwiseAbs().maxCoeff() < 1e-6 * x.cwiseAbs().maxCoeff());
    }

    SUBCASE("dc gain one: constant in, constant out") {
        const int m = 32;
        const double tau = 2.0;
        const RealMatrix w = g::lti_filter_matrix(g::FilterKernel::RC, 40.0 / tau, tau, m, m);
        const RealVector y = w * RealVector::Ones(m);
        // interior outputs (transient settled) stay at the input level
        for (int i = m / 2; i < m; ++i) CHECK(y[i] == doctest::Approx(1.0).epsilon(1e-3));
    }

    SUBCASE("rc step response") {
        const int n_in = 200;
        const int n_out = 200;
        const double tau = 1.0;
        const double cutoff = 12.0;  // 1/RC
        const RealMatrix w =
            g::lti_filter_matrix(g::FilterKernel::RC, cutoff, tau, n_in, n_out);
        const RealVector y = w * RealVector::Ones(n_in);  // step applied at t = 0
        for (int i = 0; i < n_out; i += 13) {
            const double t = (i + 0.5) * tau / n_out;
            const double expected = 1.0 - std::exp(-cutoff * t);
            if (expected > 0.05) {
                CHECK(y[i] == doctest::Approx(expected).epsilon(0.02));
            }
        }
    }

    SUBCASE("sampled kernel matches the analytic rc matrix") {
        const double tau = 1.0;
        const double cutoff = 8.0;
        const int nk = 4000;
        const double dt = 8.0 / cutoff / nk * cutoff;  // cover ~8 time constants
        RealVector kv(nk);
        for (int k = 0; k < nk; ++k) kv[k] = cutoff * std::exp(-cutoff * (k + 0.5) * dt);
        const RealMatrix ws = g::lti_filter_matrix_from_samples(kv, dt, tau, 20, 20);
        const RealMatrix wa = g::lti_filter_matrix(g::FilterKernel::RC, cutoff, tau, 20, 20);
        CHECK((ws - wa).cwiseAbs().maxCoeff() < 2e-3);
    }

    SUBCASE("filtered signal is the single source of truth") {
        // shift series driven by the filtered pulse equals the series built
        // from explicitly filtered values
        const int m = 12;
        const double tau = 1.0;
        const RealMatrix w = g::lti_filter_matrix(g::FilterKernel::RC, 15.0, tau, m, m);
        const Matrix op = random_hermitian(2, 19);
        const RealVector v = random_vector(m, 20);

        g::CostGraph through(m);
        const int a = through.add(g::make_slice(0, m), {0});
        const int filtered = through.add(g::make_linear_map(w), {a});
        const int series =
            through.add(g::make_shift_series(op, RealVector::Constant(m, tau / m)), {filtered});
        const int u = through.add(g::make_unitary(), {series});
        through.add(g::make_optimal_cost(random_unitary(2, 21), Projector::full(2)), {u});

        g::CostGraph direct(m);
        const int c = direct.add(g::make_const_real(w * v), {});
        const int series2 =
            direct.add(g::make_shift_series(op, RealVector::Constant(m, tau / m)), {c});
        const int u2 = direct.add(g::make_unitary(), {series2});
        direct.add(g::make_optimal_cost(random_unitary(2, 21), Projector::full(2)), {u2});

        CHECK(through.value(v) == doctest::Approx(direct.value(v)).epsilon(1e-14));
        check_gradient(through, v);
    }
}

TEST_CASE("crab basis") {
    SUBCASE("zero coefficients give the zero waveform") {
        const RealMatrix b = g::crab_fourier_basis(4, 1.0, 10);
        CHECK((b * RealVector::Zero(4)).cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("single basis function is sampled directly") {
        const RealMatrix b = g::crab_fourier_basis(1, 1.0, 16);
        RealVector c(1);
        c << 1.0;
        const RealVector wave = b * c;
        for (int i = 0; i < 16; ++i) {
            const double t = (i + 0.5) / 16.0;
            CHECK(wave[i] == doctest::Approx(std::sin(2.0 * kPi * t)));
        }
    }

    SUBCASE("two-term sum matches the pointwise analytic sum") {
        const RealMatrix b = g::crab_fourier_basis(2, 2.0, 24);
        RealVector c(2);
        c << 0.7, -1.3;
        const RealVector wave = b * c;
        for (int i = 0; i < 24; ++i) {
            const double t = (i + 0.5) * 2.0 / 24.0;
            const double expected =
                0.7 * std::sin(2.0 * kPi * t / 2.0) - 1.3 * std::cos(2.0 * kPi * t / 2.0);
            CHECK(wave[i] == doctest::Approx(expected));
        }
    }
}

TEST_CASE("filter-function costs") {
    // X_pi pipeline in the spirit of the sample optimization: pwc -> sinc
    // band limit -> drive -> costs.
    const int m = 6;
    const double tau = 1.0;
    const Matrix c_op = 0.5 * ops::sigma_minus();
    const Matrix n_op = 0.5 * ops::sigma_z();
    const RealVector durations = RealVector::Constant(m, tau / m);

    auto build = [&](std::unique_ptr<g::Node> cost_node) {
        g::CostGraph cg(m);
        const int a = cg.add(g::make_slice(0, m), {0});
        const int filt = cg.add(
            g::make_linear_map(g::lti_filter_matrix(g::FilterKernel::Sinc, 80.0, tau, m, m)),
            {a});
        const int gamma = cg.add(g::make_cartesian(), {filt, filt});
        const int series = cg.add(g::make_drive_series(c_op, durations), {gamma});
        const int u = cg.add(g::make_unitary(), {series});
        (void)u;
        cg.add(std::move(cost_node), {series});
        return cg;
    };

    SUBCASE("quasi-static cost gradient") {
        g::CostGraph cg = build(g::make_quasi_static_cost(n_op, Projector::full(2), 96));
        for (uint64_t s = 0; s < 20; ++s) check_gradient(cg, random_vector(m, 200 + s));
    }

    SUBCASE("fixed-frequency cost gradient") {
        g::CostGraph cg =
            build(g::make_fixed_freq_cost(n_op, Projector::full(2), 96, 2.0 * kPi * 2.0));
        for (uint64_t s = 0; s < 20; ++s) check_gradient(cg, random_vector(m, 230 + s));
    }

    SUBCASE("band cost gradient") {
        RealVector psd = RealVector::Constant(9, 1.0);
        g::CostGraph cg = build(g::make_band_cost(n_op, Projector::full(2), 96, 0.0,
                                                  2.0 * kPi * 3.0, 9, psd));
        for (uint64_t s = 0; s < 20; ++s) check_gradient(cg, random_vector(m, 260 + s));
    }

    SUBCASE("optimal cost at the exact target is zero") {
        g::CostGraph cg(1);
        const int t = cg.add(g::make_slice(0, 1), {0});
        const int u = cg.add(g::make_evolve_const(ops::sigma_x()), {t});
        cg.add(g::make_optimal_cost(matrix_exp_unitary(ops::sigma_x(), 0.7),
                                    Projector::full(2)),
               {u});
        RealVector v(1);
        v << 0.7;
        CHECK(cg.value(v) < 1e-14);
    }
}

TEST_CASE("duration penalty") {
    g::CostGraph cg(3);
    const int t = cg.add(g::make_slice(0, 3), {0});
    cg.add(g::make_duration_penalty(1.0, 2.0), {t});
    RealVector under(3);
    under << 0.2, 0.3, 0.4;
    CHECK(cg.value(under) == 0.0);
    RealVector over(3);
    over << 0.5, 0.5, 0.5;
    CHECK(cg.value(over) == doctest::Approx(2.0 * 0.25));
    check_gradient(cg, over);
}

TEST_CASE("x-pi pipeline gradient on 20 random vectors") {
    // full sample-optimization pipeline: variables -> pwc -> sinc filter ->
    // drive -> unitary -> weighted optimal + quasi-static costs
    const int m = 8;
    const double tau = 1.0;
    g::CostGraph cg(m);
    const int a = cg.add(g::make_slice(0, m), {0});
    const int filt = cg.add(
        g::make_linear_map(g::lti_filter_matrix(g::FilterKernel::Sinc, 60.0, tau, m, m)), {a});
    const int zeros = cg.add(g::make_const_real(RealVector::Zero(m)), {});
    const int gamma = cg.add(g::make_cartesian(), {filt, zeros});
    const int series =
        cg.add(g::make_drive_series(0.5 * ops::sigma_minus(), RealVector::Constant(m, tau / m)),
               {gamma});
    const int u = cg.add(g::make_unitary(), {series});
    const int opt = cg.add(
        g::make_optimal_cost(Complex(0, -1) * ops::sigma_x(), Projector::full(2)), {u});
    const int robust =
        cg.add(g::make_quasi_static_cost(0.5 * ops::sigma_z(), Projector::full(2), 128),
               {series});
    RealVector weights(2);
    weights << 1.0, 0.3;
    cg.add(g::make_weighted_sum(weights), {opt, robust});

    for (uint64_t s = 0; s < 20; ++s) check_gradient(cg, random_vector(m, 300 + s, 2.0));
}
