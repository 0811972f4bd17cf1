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

#include "qctrlkit/scenarios.hpp"

#include <cmath>
#include <numbers>

#include <json.hpp>

#include "qctrlkit/control.hpp"
#include "qctrlkit/ops.hpp"

namespace qctrlkit::scenarios {

namespace {
constexpr double kPi = std::numbers::pi;
using nlohmann::json;

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

json real_vector_json(const RealVector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json complex_vector_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v[i]));
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// CPMG
// ---------------------------------------------------------------------------

ControlSolution cpmg_sequence(int order, double duration, double pulse_width) {
    if (order < 0) throw ConfigError("cpmg_sequence: order must be >= 0");
    if (!(duration > 0.0)) throw ConfigError("cpmg_sequence: duration must be positive");
    const Matrix zero_drift = Matrix::Zero(2, 2);
    if (order == 0) return ControlSolution::free_evolution(zero_drift, duration);

    if (!(pulse_width > 0.0) || order * pulse_width >= duration) {
        throw ConfigError("cpmg_sequence: pulses do not fit in the duration");
    }
    const double first_center = duration / (2.0 * order);
    if (first_center - 0.5 * pulse_width <= 0.0) {
        throw ConfigError("cpmg_sequence: pulses overlap the sequence boundary");
    }

    // Segments alternate idle / pulse / idle / ... with pulse area pi.
    const double amplitude = kPi / pulse_width;
    std::vector<double> durations;
    std::vector<double> values;
    double cursor = 0.0;
    for (int j = 1; j <= order; ++j) {
        const double center = duration * (j - 0.5) / order;
        const double start = center - 0.5 * pulse_width;
        if (start <= cursor) throw ConfigError("cpmg_sequence: overlapping pulses");
        durations.push_back(start - cursor);
        values.push_back(0.0);
        durations.push_back(pulse_width);
        values.push_back(amplitude);
        cursor = start + pulse_width;
    }
    durations.push_back(duration - cursor);
    values.push_back(0.0);

    RealVector v(static_cast<Eigen::Index>(values.size()));
    for (size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
    ShiftTerm pulse(RealPwc(std::move(v), Segmentation(durations)), 0.5 * ops::sigma_x());
    return ControlSolution({}, {std::move(pulse)}, zero_drift, duration);
}

OperatorSeries dephasing_probe(double duration) {
    return OperatorSeries::constant(0.5 * ops::sigma_z(), duration);
}

// ---------------------------------------------------------------------------
// DRAG qutrit
// ---------------------------------------------------------------------------

namespace {

Matrix qutrit_lowering() {
    Matrix a = Matrix::Zero(3, 3);
    a(0, 1) = 1.0;
    a(1, 2) = std::sqrt(2.0);
    return a;
}

Matrix qutrit_number() {
    Matrix n = Matrix::Zero(3, 3);
    n(1, 1) = 1.0;
    n(2, 2) = 2.0;
    return n;
}

ControlSolution build_drag_control(const DragQutritConfig& config, double amplitude) {
    const double tau = config.duration;
    const int m = config.segments;
    const double sigma = config.gaussian_sigma_fraction * tau;

    Vector gamma(m);
    RealVector detuning(m);
    for (int i = 0; i < m; ++i) {
        const double t = (i + 0.5) * tau / m;
        const double x = (t - 0.5 * tau) / sigma;
        const double envelope = std::exp(-0.5 * x * x);
        const double in_phase = amplitude * envelope;
        const double derivative = -amplitude * x / sigma * envelope;
        const double quadrature =
            -config.drag_weight * derivative / config.anharmonicity;
        gamma[i] = Complex(in_phase, quadrature);
        detuning[i] = config.detuning_amplitude * envelope * envelope;
    }

    const Segmentation grid = Segmentation::uniform(tau, m);
    DriveTerm drive(ComplexPwc(std::move(gamma), grid), qutrit_lowering());
    ShiftTerm shift(RealPwc(std::move(detuning), grid), qutrit_number());
    Matrix drift = Matrix::Zero(3, 3);
    drift(2, 2) = config.anharmonicity;  // (eta/2) a^dag^2 a^2 = diag(0, 0, eta)
    return ControlSolution({std::move(drive)}, {std::move(shift)}, std::move(drift), tau);
}

double excited_population(const ControlSolution& ctrl) {
    const OperatorSeries h = assemble_hamiltonian(ctrl);
    const Matrix u = unitary_evolution(h, {ctrl.duration}).front();
    return std::norm(u(1, 0));
}

}  // namespace

namespace {

// Golden-section sweep of the drive peak maximizing the |0> -> |1> transfer.
double calibrate_amplitude(const DragQutritConfig& config) {
    const double sigma = config.gaussian_sigma_fraction * config.duration;
    const double area = sigma * std::sqrt(2.0 * kPi);  // full Gaussian integral
    const double seed = kPi / (2.0 * area);            // 2 integral I dt = pi
    double lo = 0.5 * seed;
    double hi = 1.5 * seed;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - gr * (hi - lo);
    double b = lo + gr * (hi - lo);
    double fa = excited_population(build_drag_control(config, a));
    double fb = excited_population(build_drag_control(config, b));
    for (int it = 0; it < 60; ++it) {
        if (fa < fb) {
            lo = a;
            a = b;
            fa = fb;
            b = lo + gr * (hi - lo);
            fb = excited_population(build_drag_control(config, b));
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - gr * (hi - lo);
            fa = excited_population(build_drag_control(config, a));
        }
    }
    return 0.5 * (lo + hi);
}

// Stark-shift compensation of the qubit transition, in units of A^2 / eta;
// fixed by a calibration sweep of the bundled scenario.
constexpr double kDetuningCompensation = 4.0;

}  // namespace

DragQutritScenario drag_qutrit(const DragQutritConfig& config) {
    if (!(config.duration > 0.0) || config.segments < 8) {
        throw ConfigError("drag_qutrit: bad duration or segment count");
    }
    DragQutritConfig resolved = config;
    if (resolved.auto_detuning) {
        DragQutritConfig bare = resolved;
        bare.detuning_amplitude = 0.0;
        const double a0 = bare.amplitude != 0.0 ? bare.amplitude : calibrate_amplitude(bare);
        resolved.detuning_amplitude =
            kDetuningCompensation * a0 * a0 / resolved.anharmonicity;
    }
    const double amplitude = resolved.amplitude != 0.0 ? resolved.amplitude
                                                       : calibrate_amplitude(resolved);

    DragQutritScenario out{build_drag_control(resolved, amplitude), Matrix::Zero(3, 3), 0, 0,
                           amplitude};
    out.dephasing_op(0, 0) = 1.0;
    out.dephasing_op(1, 1) = -1.0;  // sigma_z on the {|0>, |1>} qubit subspace
    return out;
}

std::vector<NoiseChannel> drag_noise_channels(const DragQutritScenario& scenario,
                                              const OneSidedPsd& detuning_psd,
                                              const OneSidedPsd& dephasing_psd) {
    std::vector<NoiseChannel> channels;
    channels.push_back(
        NoiseChannel::on_shift(scenario.detuning_shift_index, detuning_psd));
    channels.push_back(NoiseChannel::additive(
        OperatorSeries::constant(scenario.dephasing_op, scenario.control.duration),
        dephasing_psd));
    return channels;
}

ControlSolution apply_drive_phase_noise(const ControlSolution& ctrl, int drive_index,
                                        const NoiseTimeSeries& beta) {
    if (drive_index < 0 || drive_index >= static_cast<int>(ctrl.drives.size())) {
        throw ConfigError("apply_drive_phase_noise: missing drive");
    }
    const ComplexPwc& pulse = ctrl.drives[static_cast<size_t>(drive_index)].pulse;

    // Joint grid of the pulse and the noise sampling cells, phases rewritten
    // at segment midpoints.
    std::vector<double> boundaries = pulse.segmentation.boundaries();
    const double tau = ctrl.duration;
    for (int k = 0; k + 1 < beta.size(); ++k) {
        const double edge = (k + 0.5) * beta.dt;
        if (edge < tau) boundaries.push_back(edge);
    }
    std::sort(boundaries.begin(), boundaries.end());
    std::vector<double> durations;
    std::vector<Complex> values;
    for (size_t i = 0; i + 1 < boundaries.size(); ++i) {
        const double dt = boundaries[i + 1] - boundaries[i];
        if (dt <= 1e-15 * tau) continue;
        const double mid = 0.5 * (boundaries[i] + boundaries[i + 1]);
        const Complex gamma = pulse.at(mid);
        const PolarValue pv = polar_from_complex(gamma);
        const double noise = shannon_interpolate_periodic(beta, mid);
        values.push_back(complex_from_polar(pv.modulus, pv.phase + noise));
        durations.push_back(dt);
    }
    Vector v(static_cast<Eigen::Index>(values.size()));
    for (size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];

    ControlSolution out = ctrl;
    out.drives[static_cast<size_t>(drive_index)] =
        DriveTerm(ComplexPwc(std::move(v), Segmentation(durations)),
                  ctrl.drives[static_cast<size_t>(drive_index)].op);
    return out;
}

// ---------------------------------------------------------------------------
// iSWAP subspace
// ---------------------------------------------------------------------------

IswapSystem iswap_system(const IswapConfig& config) {
    IswapSystem out;
    // Basis order (|00>, |10>, |01>, |11>).
    out.coupling_op = Matrix::Zero(4, 4);
    out.coupling_op(1, 2) = 0.5;  // (1/2)|10><01|
    out.qubit_drive_op = Matrix::Zero(4, 4);
    out.qubit_drive_op(0, 2) = 0.5;  // (1/2)|0><1| on the fixed qubit
    out.qubit_drive_op(1, 3) = 0.5;
    out.noise_op = Matrix::Zero(4, 4);
    out.noise_op(0, 0) = -0.5;
    out.noise_op(1, 1) = 0.5;
    out.noise_op(2, 2) = -0.5;
    out.noise_op(3, 3) = 0.5;
    out.lambda_max = config.lambda_max;
    return out;
}

double iswap_coupling_rate(double g, double modulation_amplitude,
                           double modulation_frequency) {
    if (!(modulation_frequency > 0.0)) {
        throw ConfigError("iswap_coupling_rate: modulation frequency must be positive");
    }
    return 2.0 * g * std::cyl_bessel_j(1, modulation_amplitude / (2.0 * modulation_frequency));
}

ControlSolution iswap_pi_control(const IswapSystem& system, double duration, double xi,
                                 int segments) {
    const double lambda = kPi / duration;  // integral Lambda dt = pi
    const Complex gamma = lambda * std::polar(1.0, xi);
    DriveTerm drive(ComplexPwc::constant(gamma, duration, segments), system.coupling_op);
    return ControlSolution({std::move(drive)}, {}, Matrix::Zero(4, 4), duration);
}

// ---------------------------------------------------------------------------
// Two-qubit probe circuits
// ---------------------------------------------------------------------------

Matrix gate_generator(const Matrix& unitary, double t_gate) {
    if (!(t_gate > 0.0)) throw ConfigError("gate_generator: gate time must be positive");
    Eigen::ComplexSchur<Matrix> schur(unitary);
    if (schur.info() != Eigen::Success) {
        throw NumericError("gate_generator: Schur decomposition failed");
    }
    // For a unitary input the triangular factor is diagonal up to roundoff;
    // the principal log keeps every phase in (-pi, pi].
    const Matrix& t = schur.matrixT();
    const Matrix& q = schur.matrixU();
    Vector log_diag(t.rows());
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
        log_diag[i] = -std::arg(t(i, i)) / t_gate;
    }
    Matrix h = q * log_diag.asDiagonal() * q.adjoint();
    return 0.5 * (h + h.adjoint());
}

namespace {

Matrix cnot_ab() {
    Matrix m = Matrix::Identity(4, 4);
    m(2, 2) = 0.0;
    m(3, 3) = 0.0;
    m(2, 3) = 1.0;
    m(3, 2) = 1.0;
    return m;
}

std::vector<Matrix> pauli_products() {
    const std::array<Matrix, 4> basis = {ops::identity(2), ops::sigma_x(), ops::sigma_y(),
                                         ops::sigma_z()};
    std::vector<Matrix> out;
    out.reserve(16);
    for (const auto& a : basis) {
        for (const auto& b : basis) out.push_back(ops::kron(a, b));
    }
    return out;
}

}  // namespace

TwoQubitProbe two_qubit_probe(int idle_before_swap, int idle_between_swaps, double t_gate,
                              int total_gates) {
    const int i = idle_before_swap;
    const int j = idle_between_swaps;
    if (i < 0 || j < 0 || 16 + i + j > total_gates) {
        throw ConfigError("two_qubit_probe: idle counts overflow the circuit");
    }

    const Matrix id4 = ops::identity(4);
    const Matrix h_a = ops::kron(ops::hadamard(), ops::identity(2));
    const Matrix h_ab = ops::kron(ops::hadamard(), ops::hadamard());
    const Matrix x_b = ops::kron(ops::identity(2), ops::sigma_x());
    const Matrix cnot = cnot_ab();

    std::vector<Matrix> gates;
    auto push = [&](const Matrix& g) { gates.push_back(g); };
    auto idle = [&](int count) {
        for (int r = 0; r < count; ++r) push(id4);
    };
    // U_E = X_b CNOT H_a applied in time order H_a, CNOT, X_b.
    push(h_a);
    push(cnot);
    push(x_b);
    idle(i);
    // SW = CNOT H CNOT H CNOT (palindromic, so time order matches).
    for (const Matrix* g : {&cnot, &h_ab, &cnot, &h_ab, &cnot}) push(*g);
    idle(j);
    for (const Matrix* g : {&cnot, &h_ab, &cnot, &h_ab, &cnot}) push(*g);
    idle(total_gates - 16 - i - j);
    // U_E^dag in time order X_b, CNOT, H_a.
    push(x_b);
    push(cnot);
    push(h_a);

    // PWC realization: every gate is one segment; the time-dependent
    // generator is decomposed over the 16 two-qubit Pauli products so the
    // circuit fits the drive/shift/drift control form.
    const int n = static_cast<int>(gates.size());
    const std::vector<Matrix> basis = pauli_products();
    RealMatrix coeffs(n, 16);
    for (int g = 0; g < n; ++g) {
        const Matrix gen = gate_generator(gates[static_cast<size_t>(g)], t_gate);
        for (int b = 0; b < 16; ++b) {
            coeffs(g, b) = 0.25 * (basis[static_cast<size_t>(b)] * gen).trace().real();
        }
    }

    const double duration = n * t_gate;
    const Segmentation grid = Segmentation::uniform(duration, n);
    std::vector<ShiftTerm> shifts;
    for (int b = 0; b < 16; ++b) {
        if (coeffs.col(b).cwiseAbs().maxCoeff() < 1e-14) continue;
        shifts.emplace_back(RealPwc(coeffs.col(b), grid), basis[static_cast<size_t>(b)]);
    }

    Matrix noise_op = Matrix::Zero(4, 4);
    noise_op(1, 1) = 1.0;   // (Z_a - Z_b)/2 on |01>
    noise_op(2, 2) = -1.0;  // and |10>

    return TwoQubitProbe{std::move(gates),
                         ControlSolution({}, std::move(shifts), Matrix::Zero(4, 4), duration),
                         std::move(noise_op), i, j};
}

// ---------------------------------------------------------------------------
// Crosstalk compilation problems
// ---------------------------------------------------------------------------

CrosstalkConfig CrosstalkConfig::defaults() {
    CrosstalkConfig c;
    const double unit = 2.0 * kPi * 1e6;  // 2 pi MHz
    c.couplings = {{{-0.27935, 0.1599, -0.52793, -0.74297},
                    {-0.1382, 0.15827, -0.33507, -0.3418},
                    {-0.276, -0.6313, 0.24327, -0.74777},
                    {-0.26175, -0.49503, 0.14497, -0.70843}}};
    for (auto& pair : c.couplings) {
        for (auto& v : pair) v *= unit;
    }
    return c;
}

RealVector crosstalk_zz_diagonal(const CrosstalkConfig& config) {
    const int dim = 243;  // 3^5
    RealVector diag = RealVector::Zero(dim);
    for (int s = 0; s < dim; ++s) {
        int digits[5];
        int rem = s;
        for (int q = 4; q >= 0; --q) {
            digits[q] = rem % 3;
            rem /= 3;
        }
        for (int p = 0; p < 4; ++p) {
            const int a = digits[p];
            const int b = digits[p + 1];
            if (a >= 1 && b >= 1) {
                // alpha indices: (1,1)=0, (1,2)=1, (2,1)=2, (2,2)=3
                const int idx = (a - 1) * 2 + (b - 1);
                diag[s] += config.couplings[static_cast<size_t>(p)][static_cast<size_t>(idx)];
            }
        }
    }
    return diag;
}

Vector crosstalk_target_diagonal() {
    const Complex omega = std::polar(1.0, 2.0 * kPi / 3.0);
    Vector u_cphi = Vector::Ones(9);
    u_cphi[4] = std::conj(omega);  // |11>
    u_cphi[5] = omega;             // |12>
    u_cphi[7] = omega;             // |21>
    u_cphi[8] = std::conj(omega);  // |22>

    Vector target = Vector::Ones(243);
    for (int s = 0; s < 243; ++s) {
        int digits[5];
        int rem = s;
        for (int q = 4; q >= 0; --q) {
            digits[q] = rem % 3;
            rem /= 3;
        }
        const int pair12 = digits[0] * 3 + digits[1];
        const int pair34 = digits[2] * 3 + digits[3];
        target[s] = u_cphi[pair12] * u_cphi[pair34];
    }
    return target;
}

namespace {

json crosstalk_problem_impl(const CrosstalkConfig& config, int m, int k) {
    const int n_gate_vars = (m + 1) * k * 20;  // 10 thetas + 10 phis per factor
    const int n_vars = m + n_gate_vars;
    const double tau_unit = 2.0 * config.tau_max / m;
    const double penalty =
        config.penalty_weight > 0.0 ? config.penalty_weight
                                    : 100.0 / (config.tau_max * config.tau_max);

    json nodes = json::array();
    int next_id = 1;
    auto add = [&](json node) {
        node["id"] = next_id;
        nodes.push_back(std::move(node));
        return next_id++;
    };

    // Single-qutrit drive operators C_10 = |1><0|/2 and C_21 = |2><1|/2.
    Matrix c10 = Matrix::Zero(3, 3);
    c10(1, 0) = 0.5;
    Matrix c21 = Matrix::Zero(3, 3);
    c21(2, 1) = 0.5;
    const json c10_json = matrix_json(c10);
    const json c21_json = matrix_json(c21);

    // Free-evolution factors under the diagonal coupling Hamiltonian.
    const RealVector zz = crosstalk_zz_diagonal(config);
    json zz_json = real_vector_json(zz);

    std::vector<int> chain;  // time-ordered factors P_0, E_1, P_1, ...
    int var_cursor = m;      // gate variables start after the tau block

    auto add_gate_factor = [&]() {
        std::vector<int> qutrit_units;
        for (int q = 0; q < 5; ++q) {
            std::vector<int> terms;
            for (int nu = 0; nu < 2; ++nu) {
                const int theta_idx = var_cursor + q * 2 + nu;
                const int phi_idx = var_cursor + 10 + q * 2 + nu;
                const int theta =
                    add({{"op", "slice"}, {"in", {0}}, {"offset", theta_idx}, {"length", 1}});
                const int phi =
                    add({{"op", "slice"}, {"in", {0}}, {"offset", phi_idx}, {"length", 1}});
                const int gamma = add({{"op", "polar"}, {"in", {theta, phi}}});
                terms.push_back(add({{"op", "drive"},
                                     {"in", {gamma}},
                                     {"operator", nu == 0 ? c10_json : c21_json},
                                     {"durations", {1.0}}}));
            }
            const int h = add({{"op", "sum_series"}, {"in", terms}});
            qutrit_units.push_back(add({{"op", "unitary"}, {"in", {h}}}));
        }
        int factor = qutrit_units[0];
        for (int q = 1; q < 5; ++q) {
            factor = add({{"op", "kron"}, {"in", {factor, qutrit_units[static_cast<size_t>(q)]}}});
        }
        var_cursor += 20;
        return factor;
    };

    for (int j = 0; j <= m; ++j) {
        std::vector<int> factors;
        for (int l = 0; l < k; ++l) factors.push_back(add_gate_factor());
        int product = factors[0];
        if (k > 1) {
            product = add({{"op", "product"}, {"in", factors}});
        }
        chain.push_back(product);
    }
    const int tau_all = add({{"op", "slice"}, {"in", {0}}, {"offset", 0}, {"length", m}});
    const int tau_sec =
        add({{"op", "affine"}, {"in", {tau_all}}, {"scale", tau_unit}, {"shift", 0.0}});
    std::vector<int> sandwich{tau_sec};
    sandwich.insert(sandwich.end(), chain.begin(), chain.end());
    const int evolution =
        add({{"op", "interleaved_evolution"}, {"in", sandwich}, {"diagonal", zz_json}});
    const int infidelity = add({{"op", "optimal_cost"},
                                {"in", {evolution}},
                                {"label", "infidelity"},
                                {"target_diagonal",
                                 complex_vector_json(crosstalk_target_diagonal())}});

    const int tau_block = add({{"op", "slice"}, {"in", {0}}, {"offset", 0}, {"length", m}});
    const int tau_scaled = add({{"op", "affine"},
                                {"in", {tau_block}},
                                {"label", "durations"},
                                {"scale", tau_unit},
                                {"shift", 0.0}});
    const int dur_penalty = add({{"op", "duration_penalty"},
                                 {"in", {tau_scaled}},
                                 {"tau_max", config.tau_max},
                                 {"weight", penalty}});
    add({{"op", "weighted_sum"}, {"in", {infidelity, dur_penalty}}, {"weights", {1.0, 1.0}}});

    json lower = json::array();
    json upper = json::array();
    json init_lower = json::array();
    json init_upper = json::array();
    for (int i = 0; i < m; ++i) {
        lower.push_back(0.0);
        upper.push_back(1.0);
        init_lower.push_back(0.05);
        init_upper.push_back(0.95);
    }
    // Random gate angles start small: large rotations land on the flat
    // region of the 243-dimensional overlap where gradients vanish.
    for (int f = 0; f < (m + 1) * k; ++f) {
        for (int t = 0; t < 10; ++t) {
            lower.push_back(0.0);
            upper.push_back(2.0 * kPi);
            init_lower.push_back(0.0);
            init_upper.push_back(0.5);
        }
        for (int t = 0; t < 10; ++t) {
            lower.push_back(-2.0 * kPi);
            upper.push_back(2.0 * kPi);
            init_lower.push_back(-kPi);
            init_upper.push_back(kPi);
        }
    }

    json doc;
    doc["variables"] = {{"count", n_vars},
                        {"lower", lower},
                        {"upper", upper},
                        {"initial_lower", init_lower},
                        {"initial_upper", init_upper}};
    doc["nodes"] = std::move(nodes);
    doc["stop"] = {{"max_iterations", config.lbfgs_max_iterations},
                   {"gradient_tolerance", 1e-9}};
    doc["starts"] = 4;
    doc["metadata"] = {{"scenario", "crosstalk"},
                       {"free_periods", m},
                       {"gate_factors", k},
                       {"tau_unit", tau_unit},
                       {"tau_max", config.tau_max}};
    (void)infidelity;
    (void)dur_penalty;
    return doc;
}

}  // namespace

std::string crosstalk_problem_json(const CrosstalkConfig& config) {
    if (config.free_periods < 1 || config.gate_factors < 1) {
        throw ConfigError("crosstalk: need m >= 1 and k >= 1");
    }
    return crosstalk_problem_impl(config, config.free_periods, config.gate_factors).dump(2);
}

std::string crosstalk_baseline_json(const CrosstalkConfig& config) {
    CrosstalkConfig base = config;
    base.lbfgs_max_iterations = std::max(base.lbfgs_max_iterations, 400);
    // One free period; two gate factors per side so the local corrections
    // can realize arbitrary single-qutrit operations (a single exponential
    // of the zero-diagonal drive generators cannot produce phase gates).
    return crosstalk_problem_impl(base, 1, 2).dump(2);
}

// ---------------------------------------------------------------------------
// Benchmark problems
// ---------------------------------------------------------------------------

std::string hadamard_four_qubit_problem_json(const HadamardBenchConfig& config) {
    const int m = config.segments;
    const int n_vars = 3 * m;
    const double tau = config.duration;

    const Matrix drive_op = 0.5 * ops::embed(ops::sigma_minus(), 0, 4);
    const Matrix shift_op = 0.5 * ops::embed(ops::sigma_z(), 0, 4);
    const Matrix target = ops::kron(ops::hadamard(), ops::identity(8));

    RealVector durations = RealVector::Constant(m, tau / m);

    json nodes = json::array();
    int next_id = 1;
    auto add = [&](json node) {
        node["id"] = next_id;
        nodes.push_back(std::move(node));
        return next_id++;
    };

    const int mod_u = add({{"op", "slice"}, {"in", {0}}, {"offset", 0}, {"length", m}});
    const int mod = add(
        {{"op", "affine"}, {"in", {mod_u}}, {"scale", config.pulse_bound}, {"shift", 0.0}});
    const int phase_u = add({{"op", "slice"}, {"in", {0}}, {"offset", m}, {"length", m}});
    const int phase =
        add({{"op", "affine"}, {"in", {phase_u}}, {"scale", 2.0 * kPi}, {"shift", 0.0}});
    const int gamma = add({{"op", "polar"}, {"in", {mod, phase}}});
    const int drive = add({{"op", "drive"},
                           {"in", {gamma}},
                           {"operator", matrix_json(drive_op)},
                           {"durations", real_vector_json(durations)}});

    const int alpha_u = add({{"op", "slice"}, {"in", {0}}, {"offset", 2 * m}, {"length", m}});
    const int alpha = add(
        {{"op", "affine"}, {"in", {alpha_u}}, {"scale", config.pulse_bound}, {"shift", 0.0}});
    const int shift = add({{"op", "shift"},
                           {"in", {alpha}},
                           {"operator", matrix_json(shift_op)},
                           {"durations", real_vector_json(durations)}});

    const int drift = add({{"op", "const_series"},
                           {"operator", matrix_json(config.dephasing_drift * shift_op)},
                           {"durations", real_vector_json(durations)}});
    const int h = add({{"op", "sum_series"}, {"in", {drive, shift, drift}}});
    const int u = add({{"op", "unitary"}, {"in", {h}}});
    add({{"op", "optimal_cost"}, {"in", {u}}, {"target", matrix_json(target)}});

    json lower = json::array();
    json upper = json::array();
    for (int i = 0; i < m; ++i) {
        lower.push_back(0.0);
        upper.push_back(1.0);
    }
    for (int i = 0; i < m; ++i) {
        lower.push_back(-1.0);
        upper.push_back(1.0);
    }
    for (int i = 0; i < m; ++i) {
        lower.push_back(-1.0);
        upper.push_back(1.0);
    }

    json doc;
    doc["variables"] = {{"count", n_vars}, {"lower", lower}, {"upper", upper}};
    doc["nodes"] = std::move(nodes);
    doc["stop"] = {{"max_iterations", 2000}, {"gradient_tolerance", 1e-9}};
    doc["starts"] = 20;
    doc["metadata"] = {{"scenario", "hadamard4q"}, {"segments", m}, {"duration", tau}};
    return doc.dump(2);
}

Matrix rydberg_drift(const RydbergConfig& config) {
    const int n = config.atoms;
    const int dim = 1 << n;
    Matrix number = Matrix::Zero(2, 2);
    number(1, 1) = 1.0;
    Matrix drift = Matrix::Zero(dim, dim);
    for (int i = 0; i < n; ++i) {
        const double delta_i = (i == 0 || i == n - 1) ? config.edge_detuning : 0.0;
        if (delta_i != 0.0) drift -= delta_i * ops::embed(number, i, n);
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double v = config.interaction / std::pow(double(j - i), 6.0);
            drift += v * (ops::embed(number, i, n) * ops::embed(number, j, n));
        }
    }
    return drift;
}

Vector rydberg_ghz_state(int atoms) {
    const int dim = 1 << atoms;
    int idx_a = 0, idx_b = 0;
    for (int i = 0; i < atoms; ++i) {
        idx_a = (idx_a << 1) | (i % 2);        // |0101...>
        idx_b = (idx_b << 1) | ((i + 1) % 2);  // |1010...>
    }
    Vector psi = Vector::Zero(dim);
    psi[idx_a] = 1.0 / std::sqrt(2.0);
    psi[idx_b] = 1.0 / std::sqrt(2.0);
    return psi;
}

std::string rydberg_ghz_problem_json(const RydbergConfig& config) {
    const int m = config.segments;
    const int n = config.atoms;
    const int dim = 1 << n;

    Matrix rabi_op = Matrix::Zero(dim, dim);
    for (int i = 0; i < n; ++i) rabi_op += 0.5 * ops::embed(ops::sigma_x(), i, n);
    Matrix number = Matrix::Zero(2, 2);
    number(1, 1) = 1.0;
    Matrix detuning_op = Matrix::Zero(dim, dim);
    for (int i = 0; i < n; ++i) detuning_op -= ops::embed(number, i, n);

    RealVector durations = RealVector::Constant(m, config.duration / m);

    json nodes = json::array();
    int next_id = 1;
    auto add = [&](json node) {
        node["id"] = next_id;
        nodes.push_back(std::move(node));
        return next_id++;
    };

    const int rabi_u = add({{"op", "slice"}, {"in", {0}}, {"offset", 0}, {"length", m}});
    const int rabi =
        add({{"op", "affine"}, {"in", {rabi_u}}, {"scale", config.rabi_bound}, {"shift", 0.0}});
    const int rabi_series = add({{"op", "shift"},
                                 {"in", {rabi}},
                                 {"operator", matrix_json(rabi_op)},
                                 {"durations", real_vector_json(durations)}});

    const int det_u = add({{"op", "slice"}, {"in", {0}}, {"offset", m}, {"length", m}});
    const int det = add(
        {{"op", "affine"}, {"in", {det_u}}, {"scale", config.detuning_bound}, {"shift", 0.0}});
    const int det_series = add({{"op", "shift"},
                                {"in", {det}},
                                {"operator", matrix_json(detuning_op)},
                                {"durations", real_vector_json(durations)}});

    const int drift = add({{"op", "const_series"},
                           {"operator", matrix_json(rydberg_drift(config))},
                           {"durations", real_vector_json(durations)}});
    const int h = add({{"op", "sum_series"}, {"in", {rabi_series, det_series, drift}}});
    const int u = add({{"op", "unitary"}, {"in", {h}}});
    add({{"op", "state_cost"},
         {"in", {u}},
         {"initial", complex_vector_json(ops::basis_state(0, dim))},
         {"target", complex_vector_json(rydberg_ghz_state(n))}});

    json lower = json::array();
    json upper = json::array();
    for (int i = 0; i < 2 * m; ++i) {
        lower.push_back(-1.0);
        upper.push_back(1.0);
    }

    json doc;
    doc["variables"] = {{"count", 2 * m}, {"lower", lower}, {"upper", upper}};
    doc["nodes"] = std::move(nodes);
    doc["stop"] = {{"max_iterations", 3000}, {"gradient_tolerance", 1e-10}};
    doc["starts"] = 8;
    doc["metadata"] = {{"scenario", "rydberg-ghz"}, {"atoms", n}, {"segments", m}};
    return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Three-axis identification
// ---------------------------------------------------------------------------

std::vector<ExperimentSpec> three_axis_experiments(const ThreeAxisConfig& config) {
    if (config.points_per_preparation < 1 || !(config.max_wait > 0.0)) {
        throw ConfigError("three_axis_experiments: bad configuration");
    }
    const std::vector<Matrix> params = {0.5 * ops::sigma_x(), 0.5 * ops::sigma_y(),
                                        0.5 * ops::sigma_z()};
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Vector plus_x(2), plus_y(2), plus_z(2);
    plus_x << inv_sqrt2, inv_sqrt2;
    plus_y << inv_sqrt2, Complex(0.0, inv_sqrt2);
    plus_z << 1.0, 0.0;

    // Preparations in the x, y, z eigenbases measured in z, x, y
    // respectively, so the rotation sense is visible in the data.
    const std::array<std::pair<Vector, Matrix>, 3> setups = {
        std::make_pair(plus_x, ops::sigma_z()),
        std::make_pair(plus_y, ops::sigma_x()),
        std::make_pair(plus_z, ops::sigma_y()),
    };

    std::vector<ExperimentSpec> experiments;
    const int points = config.points_per_preparation;
    for (const auto& [psi, obs] : setups) {
        for (int i = 0; i < points; ++i) {
            const double t = config.max_wait * (i + 1) / points;
            experiments.emplace_back(t, psi, obs, RealPwc::constant(1.0, t), params);
        }
    }
    return experiments;
}

Bounds three_axis_bounds(const ThreeAxisConfig& config) {
    const double dt = config.max_wait / config.points_per_preparation;
    const double nyquist = kPi / dt;
    return Bounds::uniform(3, -nyquist, nyquist);
}

}  // namespace qctrlkit::scenarios
