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
#include "qctrlkit/ops.hpp"
#include "qctrlkit/rng.hpp"
#include "qctrlkit/simulator.hpp"

using namespace qctrlkit;

namespace {
constexpr double kPi = std::numbers::pi;

Matrix random_hermitian(int n, uint64_t seed) {
    RngStream rng(seed);
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) m(i, j) = Complex(rng.normal(), rng.normal());
    }
    return 0.5 * (m + m.adjoint());
}
}  // namespace

TEST_CASE("joint segmentation") {
    SUBCASE("halves plus thirds matches the six-uniform refinement") {
        const Segmentation halves = Segmentation::uniform(1.0, 2);
        const Segmentation thirds = Segmentation::uniform(1.0, 3);
        const JointGrid grid = joint_segments({halves, thirds});
        CHECK(grid.segmentation.count() == 4);

        // Values on the tau/6 refinement match the tabulated pairs
        // (O1 b1)(O1 b1)(O1 b2)(O2 b2)(O2 b3)(O2 b3).
        const int expected_pairs[6][2] = {{0, 0}, {0, 0}, {0, 1}, {1, 1}, {1, 2}, {1, 2}};
        for (int r = 0; r < 6; ++r) {
            const double mid = (r + 0.5) / 6.0;
            const int joint = grid.segmentation.segment_at(mid);
            CHECK(grid.source_segment(0, joint) == expected_pairs[r][0]);
            CHECK(grid.source_segment(1, joint) == expected_pairs[r][1]);
        }
    }

    SUBCASE("identical segmentations pass through") {
        const Segmentation seg({0.2, 0.3, 0.5});
        const JointGrid grid = joint_segments({seg, seg});
        CHECK(grid.segmentation.count() == 3);
        for (int i = 0; i < 3; ++i) {
            CHECK(grid.segmentation.duration(i) == doctest::Approx(seg.duration(i)));
            CHECK(grid.source_segment(0, i) == i);
            CHECK(grid.source_segment(1, i) == i);
        }
    }

    SUBCASE("coprime counts 2,3,5 and pointwise lookup") {
        const JointGrid grid = joint_segments({Segmentation::uniform(1.0, 2),
                                               Segmentation::uniform(1.0, 3),
                                               Segmentation::uniform(1.0, 5)});
        CHECK(grid.segmentation.count() <= 2 + 3 + 5 - 2 + 1);
        RngStream rng(4);
        const Segmentation inputs[3] = {Segmentation::uniform(1.0, 2),
                                        Segmentation::uniform(1.0, 3),
                                        Segmentation::uniform(1.0, 5)};
        for (int k = 0; k < 200; ++k) {
            const double t = rng.uniform(0.0, 1.0);
            const int joint = grid.segmentation.segment_at(t);
            for (int s = 0; s < 3; ++s) {
                CHECK(grid.source_segment(s, joint) == inputs[s].segment_at(t));
            }
        }
    }

    SUBCASE("duration mismatch rejected") {
        CHECK_THROWS_AS(
            joint_segments({Segmentation::uniform(1.0, 2), Segmentation::uniform(1.1, 2)}),
            ConfigError);
    }
}

TEST_CASE("realize noisy hamiltonian") {
    SUBCASE("no channels reduces to the ideal assembly") {
        DriveTerm drive(ComplexPwc::constant(1.3, 1.0, 4), 0.5 * ops::sigma_minus());
        const ControlSolution ctrl({drive}, {}, 0.2 * ops::sigma_z(), 1.0);
        const OperatorSeries ideal = assemble_hamiltonian(ctrl);
        const OperatorSeries noisy = realize_noisy_hamiltonian(ctrl, {}, 9);
        REQUIRE(ideal.ops.size() == noisy.ops.size());
        for (size_t i = 0; i < ideal.ops.size(); ++i) {
            CHECK((ideal.ops[i] - noisy.ops[i]).cwiseAbs().maxCoeff() < 1e-15);
        }
    }

    SUBCASE("additive constant series on zero control") {
        const double beta = 0.42;
        const ControlSolution ctrl = ControlSolution::free_evolution(Matrix::Zero(2, 2), 1.0);
        NoiseChannel channel = NoiseChannel::additive(
            OperatorSeries::constant(0.5 * ops::sigma_z(), 1.0),
            NoiseTimeSeries(RealVector::Constant(64, beta), 1.0 / 64.0));
        const OperatorSeries noisy = realize_noisy_hamiltonian(ctrl, {channel}, 1);
        for (size_t i = 1; i + 1 < noisy.ops.size(); ++i) {  // skip edge half-cells
            CHECK((noisy.ops[i] - beta * 0.5 * ops::sigma_z()).cwiseAbs().maxCoeff() <
                  2e-3 * beta);
        }
    }

    SUBCASE("multiplicative drive noise adds to the modulus") {
        const double omega = 2.0;
        const double delta = 0.3;
        const double phi = 0.7;
        DriveTerm drive(ComplexPwc::constant(omega * std::polar(1.0, phi), 1.0),
                        0.5 * ops::sigma_minus());
        const ControlSolution ctrl({drive}, {}, Matrix::Zero(2, 2), 1.0);
        NoiseChannel channel = NoiseChannel::on_drive_modulus(
            0, NoiseTimeSeries(RealVector::Constant(64, delta), 1.0 / 64.0));
        const OperatorSeries noisy = realize_noisy_hamiltonian(ctrl, {channel}, 1);
        const Matrix expected =
            0.5 * (omega + delta) *
            (std::cos(phi) * ops::sigma_x() + std::sin(phi) * ops::sigma_y());
        CHECK((noisy.ops[noisy.ops.size() / 2] - expected).cwiseAbs().maxCoeff() <
              5e-3 * omega);
    }

    SUBCASE("channel referencing a missing term") {
        const ControlSolution ctrl = ControlSolution::free_evolution(Matrix::Zero(2, 2), 1.0);
        NoiseChannel channel = NoiseChannel::on_drive_modulus(
            0, NoiseTimeSeries(RealVector::Constant(4, 0.1), 0.3));
        CHECK_THROWS_AS(realize_noisy_hamiltonian(ctrl, {channel}, 1), ConfigError);
    }
}

TEST_CASE("unitary evolution") {
    SUBCASE("zero hamiltonian is the identity at all times") {
        const OperatorSeries h = OperatorSeries::constant(Matrix::Zero(2, 2), 1.0);
        for (const Matrix& u : unitary_evolution(h, {0.0, 0.3, 1.0})) {
            CHECK((u - ops::identity(2)).cwiseAbs().maxCoeff() < 1e-15);
        }
    }

    SUBCASE("rabi pi rotation") {
        const double omega = 2.0 * kPi * 7.0;
        const double tau = kPi / omega;
        const OperatorSeries h = OperatorSeries::constant(0.5 * omega * ops::sigma_x(), tau);
        const Matrix u = unitary_evolution(h, {tau}).front();
        CHECK((u - Complex(0, -1) * ops::sigma_x()).cwiseAbs().maxCoeff() < 1e-11);
        CHECK(std::norm(u(1, 0)) == doctest::Approx(1.0));
    }

    SUBCASE("merged segments compose") {
        const Matrix hseg = random_hermitian(3, 6);
        const OperatorSeries two({hseg, hseg}, Segmentation({0.4, 0.6}));
        const OperatorSeries one({hseg}, Segmentation({1.0}));
        const Matrix ua = unitary_evolution(two, {1.0}).front();
        const Matrix ub = unitary_evolution(one, {1.0}).front();
        CHECK((ua - ub).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("partial exponential at interior times") {
        const double omega = 3.0;
        const OperatorSeries h = OperatorSeries::constant(0.5 * omega * ops::sigma_x(), 1.0);
        const Matrix u = unitary_evolution(h, {0.37}).front();
        CHECK(std::norm(u(0, 0)) == doctest::Approx(std::cos(0.5 * omega * 0.37) *
                                                    std::cos(0.5 * omega * 0.37)));
    }

    SUBCASE("rejects out-of-range times") {
        const OperatorSeries h = OperatorSeries::constant(Matrix::Zero(2, 2), 1.0);
        CHECK_THROWS_AS(unitary_evolution(h, {1.5}), ConfigError);
    }

    SUBCASE("norm drift over many segments") {
        std::vector<Matrix> ops_list;
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            ops_list.push_back(random_hermitian(2, 1000 + static_cast<uint64_t>(i)));
        }
        const OperatorSeries h(std::move(ops_list), Segmentation::uniform(1.0, n));
        const Matrix u = unitary_evolution(h, {1.0}).front();
        Vector psi(2);
        psi << 1.0, 0.0;
        const Vector out = u * psi;
        CHECK(std::abs(out.norm() - 1.0) < 1e-8);
    }
}

TEST_CASE("state propagation and ensemble density") {
    Vector zero(2);
    zero << 1.0, 0.0;
    Vector one(2);
    one << 0.0, 1.0;

    SUBCASE("pi pulse moves all population") {
        const double omega = 5.0;
        const OperatorSeries h =
            OperatorSeries::constant(0.5 * omega * ops::sigma_x(), kPi / omega);
        const auto states = propagate_state(unitary_evolution(h, {kPi / omega}), zero);
        CHECK(std::norm(states.front()[0]) < 1e-12);
        CHECK(std::norm(states.front()[1]) == doctest::Approx(1.0));
    }

    SUBCASE("single pure state has unit purity") {
        const EnsembleDensityMatrix rho = ensemble_density({zero});
        CHECK(rho.trials == 1);
        CHECK((rho.rho * rho.rho).trace().real() == doctest::Approx(1.0));
    }

    SUBCASE("balanced mixture") {
        const EnsembleDensityMatrix rho = ensemble_density({zero, one});
        CHECK(rho.rho(0, 0).real() == doctest::Approx(0.5));
        CHECK(rho.rho(1, 1).real() == doctest::Approx(0.5));
        CHECK(std::abs(rho.rho(0, 1)) < 1e-15);
    }

    SUBCASE("density matrices are physical, purity at most one") {
        RngStream rng(14);
        std::vector<Vector> states;
        for (int m = 0; m < 20; ++m) {
            Vector psi(3);
            for (int d = 0; d < 3; ++d) psi[d] = Complex(rng.normal(), rng.normal());
            psi.normalize();
            states.push_back(psi);
        }
        const EnsembleDensityMatrix rho = ensemble_density(states);
        CHECK((rho.rho - rho.rho.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(rho.rho.trace().real() == doctest::Approx(1.0).epsilon(1e-10));
        Eigen::SelfAdjointEigenSolver<Matrix> es(rho.rho);
        CHECK(es.eigenvalues().minCoeff() > -1e-10);
        CHECK((rho.rho * rho.rho).trace().real() <= 1.0 + 1e-10);
    }
}

TEST_CASE("monte carlo robust infidelity") {
    SUBCASE("zero-power noise gives zero infidelity") {
        DriveTerm drive(ComplexPwc::constant(1.0, 1.0, 3), 0.5 * ops::sigma_minus());
        const ControlSolution ctrl({drive}, {}, Matrix::Zero(2, 2), 1.0);
        NoiseChannel channel = NoiseChannel::additive(
            OperatorSeries::constant(0.5 * ops::sigma_z(), 1.0),
            OneSidedPsd(RealVector::Zero(16), 2.0 * kPi * 0.5));
        const FidelityValue value =
            robust_infidelity_mc(ctrl, {channel}, Projector::full(2), 8, 3);
        CHECK(value.value < 1e-12);
    }

    SUBCASE("static two-point dephasing matches sin^2(b tau / 2)") {
        const double b = 0.8;
        const double tau = 1.0;
        const ControlSolution ctrl =
            ControlSolution::free_evolution(Matrix::Zero(2, 2), tau);
        double mean = 0.0;
        for (double sign : {+1.0, -1.0}) {
            NoiseChannel channel = NoiseChannel::additive(
                OperatorSeries::constant(0.5 * ops::sigma_z(), tau),
                NoiseTimeSeries(RealVector::Constant(128, sign * b), tau / 128.0));
            mean += robust_infidelity_mc(ctrl, {channel}, Projector::full(2), 1, 0).value;
        }
        mean /= 2.0;
        const double expected = std::sin(0.5 * b * tau) * std::sin(0.5 * b * tau);
        CHECK(mean == doctest::Approx(expected).epsilon(0.02));
    }

    SUBCASE("reproducible for a fixed seed") {
        const ControlSolution ctrl =
            ControlSolution::free_evolution(Matrix::Zero(2, 2), 1.0);
        RealVector s = RealVector::Constant(12, 0.05);
        NoiseChannel channel = NoiseChannel::additive(
            OperatorSeries::constant(0.5 * ops::sigma_z(), 1.0),
            OneSidedPsd(s, 2.0 * kPi));
        const FidelityValue a = robust_infidelity_mc(ctrl, {channel}, Projector::full(2), 32, 5);
        const FidelityValue b = robust_infidelity_mc(ctrl, {channel}, Projector::full(2), 32, 5);
        const FidelityValue c = robust_infidelity_mc(ctrl, {channel}, Projector::full(2), 32, 6);
        CHECK(a.value == b.value);
        CHECK(a.value != c.value);
        CHECK(a.standard_error > 0.0);
    }
}

TEST_CASE("simulation independent of pre-segmentation") {
    // identical underlying pulses expressed on different grids
    Vector gamma_a(2);
    gamma_a << 1.1, 1.1;
    Vector gamma_b(5);
    gamma_b << 1.1, 1.1, 1.1, 1.1, 1.1;
    DriveTerm da(ComplexPwc(gamma_a, Segmentation::uniform(1.0, 2)), 0.5 * ops::sigma_minus());
    DriveTerm db(ComplexPwc(gamma_b, Segmentation::uniform(1.0, 5)), 0.5 * ops::sigma_minus());
    const ControlSolution ca({da}, {}, 0.3 * ops::sigma_z(), 1.0);
    const ControlSolution cb({db}, {}, 0.3 * ops::sigma_z(), 1.0);
    const Matrix ua = unitary_evolution(assemble_hamiltonian(ca), {1.0}).front();
    const Matrix ub = unitary_evolution(assemble_hamiltonian(cb), {1.0}).front();
    CHECK((ua - ub).cwiseAbs().maxCoeff() < 1e-12);
}
