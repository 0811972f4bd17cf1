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

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qctrlkit/csv.hpp"
#include "qctrlkit/filter_functions.hpp"
#include "qctrlkit/identification.hpp"
#include "qctrlkit/ops.hpp"
#include "qctrlkit/optimizer.hpp"
#include "qctrlkit/parallel.hpp"
#include "qctrlkit/problem_io.hpp"
#include "qctrlkit/reconstruction.hpp"
#include "qctrlkit/scenarios.hpp"
#include "qctrlkit/serialization.hpp"
#include "qctrlkit/simulator.hpp"

namespace {

using nlohmann::json;
using namespace qctrlkit;

constexpr const char* kVersion = "0.1.0";
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// FNV-1a digest of a file, recorded in the run manifest.
std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "missing";
    uint64_t hash = 1469598103934665603ULL;
    char c;
    while (in.get(c)) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

struct ManifestWriter {
    json doc;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    ManifestWriter(const std::string& command, int argc, char** argv) {
        doc["command"] = command;
        json args = json::array();
        for (int i = 0; i < argc; ++i) args.push_back(argv[i]);
        doc["argv"] = args;
        doc["tool_version"] = kVersion;
    }
    void config(const std::string& key, const json& value) { doc["config"][key] = value; }
    void input(const std::string& path) { doc["inputs"][path] = file_digest(path); }
    void write(const std::string& out_path) {
        doc["wall_time_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::ofstream out(out_path);
        if (!out) throw IoError("cannot write manifest: " + out_path);
        out << doc.dump(2) << "\n";
    }
};

std::string sibling_path(const std::string& out, const std::string& suffix) {
    std::filesystem::path p(out);
    const std::string stem = (p.parent_path() / p.stem()).string();
    return stem + suffix;
}

std::vector<double> to_std(const RealVector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

// --------------------------------------------------------------------------
// simulate
// --------------------------------------------------------------------------

int run_simulate(const std::string& control_path, const std::string& channels_path,
                 uint64_t seed, int trials, const std::string& times_path,
                 const std::string& out_prefix, ManifestWriter& manifest) {
    const ControlSolution ctrl = control_from_json_file(control_path);
    std::vector<NoiseChannel> channels;
    if (!channels_path.empty()) channels = channels_from_json_file(channels_path);

    std::vector<double> times;
    if (!times_path.empty()) {
        const RealVector t = read_column_csv(times_path);
        times.assign(t.data(), t.data() + t.size());
    } else {
        for (int i = 0; i <= 200; ++i) times.push_back(ctrl.duration * i / 200.0);
    }

    const Vector psi0 = ops::basis_state(0, ctrl.dimension);
    const SimulationResult result =
        simulate_ensemble(ctrl, channels, psi0, times, trials, seed);

    std::vector<RealVector> columns;
    RealVector tcol(static_cast<Eigen::Index>(times.size()));
    for (size_t i = 0; i < times.size(); ++i) tcol[static_cast<Eigen::Index>(i)] = times[i];
    columns.push_back(tcol);
    std::string header = "t_seconds";
    for (int d = 0; d < ctrl.dimension; ++d) {
        header += ",population_" + std::to_string(d);
        columns.push_back(result.mean_populations.col(d));
    }
    write_columns_csv(out_prefix + ".populations.csv", header, columns);

    std::ofstream rho_out(out_prefix + ".rho.json");
    if (!rho_out) throw IoError("cannot write density matrix");
    rho_out << density_matrix_to_json(result.final_density) << "\n";

    manifest.write(out_prefix + ".manifest.json");
    return 0;
}

// --------------------------------------------------------------------------
// filter-function
// --------------------------------------------------------------------------

int run_filter_function(const std::string& control_path, const std::string& op_path,
                        const std::string& projector_path, const std::string& freqs_path,
                        int samples, bool hz, const std::string& out_path,
                        ManifestWriter& manifest) {
    const ControlSolution ctrl = control_from_json_file(control_path);
    const OperatorSeries noise_op = operator_series_from_json_file(op_path, ctrl.duration);
    const Projector p = projector_path.empty()
                            ? Projector::full(ctrl.dimension)
                            : projector_from_json_file(projector_path);

    RealVector freqs = read_column_csv(freqs_path);
    if (hz) freqs *= kTwoPi;
    std::vector<double> fv(freqs.data(), freqs.data() + freqs.size());

    const FilterFunctionResult ff = filter_function(ctrl, noise_op, p, fv, samples);

    RealVector omegas(static_cast<Eigen::Index>(ff.frequencies.size()));
    RealVector values(static_cast<Eigen::Index>(ff.values.size()));
    for (size_t i = 0; i < ff.frequencies.size(); ++i) {
        omegas[static_cast<Eigen::Index>(i)] = ff.frequencies[i];
        values[static_cast<Eigen::Index>(i)] = ff.values[i];
    }
    write_columns_csv(out_path, "omega_rad_per_s,filter_value", {omegas, values});
    manifest.write(sibling_path(out_path, ".manifest.json"));
    return 0;
}

// --------------------------------------------------------------------------
// optimize
// --------------------------------------------------------------------------

int run_optimize(const std::string& problem_path, int starts, uint64_t seed,
                 const std::string& out_path, ManifestWriter& manifest) {
    GraphProblem problem = problem_from_json_file(problem_path);

    MinimizeOptions options;
    options.starts = starts > 0 ? starts : problem.default_starts;
    options.seed = seed;
    options.stop = problem.stop;
    options.initial_window = problem.initial_window;
    const OptimizationResult result = minimize(problem.graph, problem.bounds, options);

    json doc;
    doc["best_cost"] = result.best_cost;
    doc["best_start"] = result.best_start;
    doc["seed"] = result.seed;
    doc["total_evaluations"] = result.total_evaluations;
    doc["best_variables"] = to_std(result.best_variables);
    doc["starts"] = json::array();
    for (const auto& record : result.starts) {
        doc["starts"].push_back({{"start", record.start_index},
                                 {"best_cost", record.best_cost},
                                 {"iterations", record.iterations},
                                 {"evaluations", record.evaluations},
                                 {"failed", record.failed},
                                 {"failure", record.failure}});
    }
    for (const auto& [label, node] : problem.node_labels) {
        const graph::Value v = problem.graph.node_value(result.best_variables, node);
        if (const auto* d = std::get_if<double>(&v)) {
            doc["diagnostics"][label] = *d;
        } else if (const auto* r = std::get_if<RealVector>(&v)) {
            doc["diagnostics"][label] = to_std(*r);
        }
    }

    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write result: " + out_path);
    out << doc.dump(2) << "\n";
    manifest.write(sibling_path(out_path, ".manifest.json"));
    return 0;
}

// --------------------------------------------------------------------------
// reconstruct
// --------------------------------------------------------------------------

int run_reconstruct(const std::string& sensitivity_path,
                    const std::vector<std::string>& control_paths,
                    const std::vector<std::string>& noise_op_paths,
                    const std::string& infidelities_path, const std::string& method,
                    const std::string& partition_path, double lambda, double svd_cutoff,
                    int samples, bool hz, const std::string& out_path,
                    ManifestWriter& manifest) {
    FrequencyPartition partition = partition_from_json_file(partition_path);
    if (hz) {
        for (auto& band : partition.channels) {
            band.omega_min *= kTwoPi;
            band.omega_max *= kTwoPi;
        }
    }

    SensitivityMatrix f_hat{RealMatrix(), partition, {}};
    if (!sensitivity_path.empty()) {
        f_hat.values = read_matrix_csv(sensitivity_path);
        if (f_hat.values.cols() != partition.total_samples()) {
            throw ConfigError("sensitivity matrix width does not match the partition");
        }
    } else {
        if (control_paths.empty() || noise_op_paths.empty()) {
            throw ConfigError(
                "reconstruct needs either --sensitivity or --controls with "
                "--noise-operators");
        }
        std::vector<ControlSolution> controls;
        for (const auto& path : control_paths) controls.push_back(control_from_json_file(path));
        std::vector<OperatorSeries> noise_ops;
        for (const auto& path : noise_op_paths) {
            noise_ops.push_back(
                operator_series_from_json_file(path, controls.front().duration));
        }
        f_hat = build_sensitivity(controls, noise_ops, partition,
                                  Projector::full(controls.front().dimension), samples);
    }

    const RealVector infid = read_column_csv(infidelities_path);
    const MeasurementRecord record(infid);

    ReconstructedPsd psd{RealVector(), partition, ReconstructionMethod::Svd, {}, false};
    if (method == "svd") {
        psd = reconstruct_svd(f_hat, record, svd_cutoff);
    } else if (method == "co") {
        CoOptions options;
        if (lambda >= 0.0) options.lambda = lambda;
        psd = reconstruct_co(f_hat, record, options);
    } else {
        throw ConfigError("reconstruct: method must be 'svd' or 'co'");
    }

    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write psd: " + out_path);
    out << "channel,omega_rad_per_s,psd_value\n";
    int offset = 0;
    for (int k = 0; k < partition.channel_count(); ++k) {
        const ChannelBand& band = partition.channels[static_cast<size_t>(k)];
        for (int l = 0; l < band.samples; ++l) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g", k, band.omega(l),
                          psd.values[offset + l]);
            out << buf << "\n";
        }
        offset += band.samples;
    }
    if (psd.lambda.has_value()) manifest.config("lambda", *psd.lambda);
    manifest.config("degenerate_l_curve", psd.degenerate_l_curve);
    manifest.write(sibling_path(out_path, ".manifest.json"));
    return 0;
}

// --------------------------------------------------------------------------
// identify
// --------------------------------------------------------------------------

int run_identify(const std::string& experiments_path, const std::string& data_path,
                 int starts, uint64_t seed, const std::string& out_path,
                 ManifestWriter& manifest) {
    const std::vector<ExperimentSpec> experiments =
        experiments_from_json_file(experiments_path);
    const Bounds bounds = experiment_bounds_from_json_file(experiments_path);

    const RealVector y = read_column_csv(data_path, 0);
    const RealVector dy = read_column_csv(data_path, 1);
    if (y.size() != static_cast<Eigen::Index>(experiments.size())) {
        throw ConfigError("identify: data row count must equal experiment count");
    }
    std::vector<DataPoint> data(experiments.size());
    for (size_t m = 0; m < data.size(); ++m) {
        data[m] = DataPoint{y[static_cast<Eigen::Index>(m)], dy[static_cast<Eigen::Index>(m)]};
    }

    IdentifyOptions options;
    options.starts = starts;
    options.seed = seed;
    const EstimationResult result = identify(experiments, data, bounds, options);

    std::ofstream out(out_path);
    if (!out) throw IoError("cannot write estimate: " + out_path);
    out << estimate_to_json(result) << "\n";
    manifest.write(sibling_path(out_path, ".manifest.json"));
    return 0;
}

// --------------------------------------------------------------------------
// scenario build
// --------------------------------------------------------------------------

json load_params(const std::string& params) {
    if (params.empty()) return json::object();
    if (!params.empty() && params.front() == '{') {
        try {
            return json::parse(params);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("scenario params: ") + e.what());
        }
    }
    std::ifstream in(params);
    if (!in) throw IoError("cannot open params file: " + params);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario params: ") + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write: " + path);
    out << text;
    if (text.empty() || text.back() != '\n') out << "\n";
}

json matrix_json_doc(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
        }
        rows.push_back(row);
    }
    return rows;
}

int run_scenario_build(const std::string& name, const std::string& params_text,
                       const std::string& out_path, uint64_t seed,
                       ManifestWriter& manifest) {
    const json params = load_params(params_text);
    manifest.config("scenario", name);
    manifest.config("params", params);

    if (name == "cpmg") {
        const int order = params.value("order", 1);
        const double duration = params.value("duration", 1e-6);
        const double width =
            params.value("pulse_width", duration / (200.0 * std::max(order, 1)));
        const ControlSolution ctrl = scenarios::cpmg_sequence(order, duration, width);
        write_text(out_path, control_to_json(ctrl));
        write_text(sibling_path(out_path, ".noise_op.json"),
                   json({{"operator", matrix_json_doc(0.5 * ops::sigma_z())}}).dump(2));
    } else if (name == "drag") {
        scenarios::DragQutritConfig config;
        config.anharmonicity = params.value("anharmonicity", config.anharmonicity);
        config.duration = params.value("duration", config.duration);
        config.gaussian_sigma_fraction =
            params.value("sigma_fraction", config.gaussian_sigma_fraction);
        config.drag_weight = params.value("drag_weight", config.drag_weight);
        config.detuning_amplitude =
            params.value("detuning_amplitude", config.detuning_amplitude);
        config.amplitude = params.value("amplitude", config.amplitude);
        config.segments = params.value("segments", config.segments);
        const scenarios::DragQutritScenario scenario = scenarios::drag_qutrit(config);
        write_text(out_path, control_to_json(scenario.control));
        write_text(sibling_path(out_path, ".noise_op.json"),
                   json({{"operator", matrix_json_doc(scenario.dephasing_op)},
                         {"calibrated_amplitude", scenario.calibrated_amplitude}})
                       .dump(2));
    } else if (name == "iswap") {
        scenarios::IswapConfig config;
        config.coupling_g = params.value("coupling_g", config.coupling_g);
        config.modulation_amplitude =
            params.value("modulation_amplitude", config.modulation_amplitude);
        config.modulation_frequency =
            params.value("modulation_frequency", config.modulation_frequency);
        config.lambda_max = params.value("lambda_max", config.lambda_max);
        const scenarios::IswapSystem system = scenarios::iswap_system(config);
        const double duration = params.value("duration", 1e-6);
        const double xi = params.value("xi", 0.0);
        const int segments = params.value("segments", 1);
        write_text(out_path,
                   control_to_json(scenarios::iswap_pi_control(system, duration, xi, segments)));
        write_text(sibling_path(out_path, ".noise_op.json"),
                   json({{"operator", matrix_json_doc(system.noise_op)}}).dump(2));
    } else if (name == "probe") {
        const int i = params.value("i", 0);
        const int j = params.value("j", 0);
        const double t_gate = params.value("t_gate", 110e-9);
        const int gates = params.value("gates", 66);
        const scenarios::TwoQubitProbe probe = scenarios::two_qubit_probe(i, j, t_gate, gates);
        write_text(out_path, control_to_json(probe.control));
        write_text(sibling_path(out_path, ".noise_op.json"),
                   json({{"operator", matrix_json_doc(probe.noise_op)}}).dump(2));
    } else if (name == "crosstalk" || name == "crosstalk-baseline") {
        scenarios::CrosstalkConfig config = scenarios::CrosstalkConfig::defaults();
        config.free_periods = params.value("free_periods", config.free_periods);
        config.gate_factors = params.value("gate_factors", config.gate_factors);
        config.tau_max = params.value("tau_max", config.tau_max);
        config.lbfgs_max_iterations =
            params.value("max_iterations", config.lbfgs_max_iterations);
        write_text(out_path, name == "crosstalk"
                                 ? scenarios::crosstalk_problem_json(config)
                                 : scenarios::crosstalk_baseline_json(config));
    } else if (name == "hadamard4q") {
        scenarios::HadamardBenchConfig config;
        config.segments = params.value("segments", config.segments);
        config.duration = params.value("duration", config.duration);
        write_text(out_path, scenarios::hadamard_four_qubit_problem_json(config));
    } else if (name == "rydberg-ghz") {
        scenarios::RydbergConfig config;
        config.atoms = params.value("atoms", config.atoms);
        config.segments = params.value("segments", config.segments);
        config.duration = params.value("duration", config.duration);
        write_text(out_path, scenarios::rydberg_ghz_problem_json(config));
    } else if (name == "three-axis") {
        scenarios::ThreeAxisConfig config;
        config.points_per_preparation = params.value("points", 20);
        config.max_wait = params.value("max_wait", 1e-6);
        const std::vector<ExperimentSpec> experiments =
            scenarios::three_axis_experiments(config);
        const Bounds bounds = scenarios::three_axis_bounds(config);

        json doc;
        doc["parameters"] = {{"count", 3},
                             {"lower", to_std(bounds.lower)},
                             {"upper", to_std(bounds.upper)}};
        doc["experiments"] = json::array();
        for (const auto& e : experiments) {
            json pulse = {{"values", to_std(e.pulse.values)},
                          {"durations", e.pulse.segmentation.durations()}};
            json ops_json = json::array();
            for (const auto& q : e.parameter_ops) ops_json.push_back(matrix_json_doc(q));
            json state = json::array();
            for (Eigen::Index s = 0; s < e.initial_state.size(); ++s) {
                state.push_back(
                    json::array({e.initial_state[s].real(), e.initial_state[s].imag()}));
            }
            doc["experiments"].push_back({{"duration", e.duration},
                                          {"initial_state", state},
                                          {"observable", matrix_json_doc(e.observable)},
                                          {"pulse", pulse},
                                          {"parameter_operators", ops_json}});
        }
        write_text(out_path, doc.dump(2));

        if (params.contains("truth")) {
            RealVector truth(3);
            for (int i = 0; i < 3; ++i) truth[i] = params["truth"][static_cast<size_t>(i)];
            const double sigma = params.value("sigma", 0.01);
            const std::vector<DataPoint> data =
                synthesize_data(truth, experiments, sigma, seed);
            std::ofstream out(sibling_path(out_path, ".data.csv"));
            if (!out) throw IoError("cannot write data csv");
            out << "y,dy\n";
            for (const auto& d : data) {
                char buf[64];
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g", d.mean, d.std_dev);
                out << buf << "\n";
            }
        }
    } else {
        throw ConfigError("unknown scenario '" + name + "'");
    }

    manifest.write(sibling_path(out_path, ".manifest.json"));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum-control engineering toolkit"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    int threads = 0;
    bool hz = false;
    app.add_option("--threads", threads, "worker pool size (default: machine parallelism)");
    app.add_flag("--hz", hz, "interpret frequency inputs as Hz (multiplied by 2 pi)");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "noisy time-domain propagation");
    std::string sim_control, sim_channels, sim_times, sim_out = "simulation";
    uint64_t sim_seed = 0;
    int sim_trials = 1;
    simulate->add_option("--control", sim_control, "control json")->required();
    simulate->add_option("--channels", sim_channels, "noise channels json");
    simulate->add_option("--seed", sim_seed, "rng seed")->required();
    simulate->add_option("--trials", sim_trials, "noise realizations");
    simulate->add_option("--times", sim_times, "sample times csv");
    simulate->add_option("--out", sim_out, "output prefix");

    // filter-function
    auto* ff = app.add_subcommand("filter-function", "leading-order filter function");
    std::string ff_control, ff_op, ff_projector, ff_freqs, ff_out = "filter_function.csv";
    int ff_samples = 0;
    ff->add_option("--control", ff_control, "control json")->required();
    ff->add_option("--noise-operator", ff_op, "noise operator json")->required();
    ff->add_option("--projector", ff_projector, "projector json");
    ff->add_option("--freqs", ff_freqs, "frequency list csv")->required();
    ff->add_option("--samples", ff_samples, "time samples (default max(1000, 10 x segments))");
    ff->add_option("--out", ff_out, "output csv");

    // optimize
    auto* optimize = app.add_subcommand("optimize", "graph cost minimization");
    std::string opt_problem, opt_out = "result.json";
    int opt_starts = 0;
    uint64_t opt_seed = 0;
    optimize->add_option("--problem", opt_problem, "problem json")->required();
    optimize->add_option("--starts", opt_starts, "optimizer starts");
    optimize->add_option("--seed", opt_seed, "rng seed")->required();
    optimize->add_option("--out", opt_out, "result json");

    // reconstruct
    auto* reconstruct = app.add_subcommand("reconstruct", "noise psd reconstruction");
    std::string rec_sensitivity, rec_infidelities, rec_method = "svd", rec_partition,
                rec_out = "psd.csv";
    std::vector<std::string> rec_controls, rec_noise_ops;
    double rec_lambda = -1.0, rec_cutoff = 1e-8;
    int rec_samples = 0;
    reconstruct->add_option("--sensitivity", rec_sensitivity, "sensitivity matrix csv");
    reconstruct->add_option("--controls", rec_controls, "control json files");
    reconstruct->add_option("--noise-operators", rec_noise_ops, "noise operator json files");
    reconstruct->add_option("--infidelities", rec_infidelities, "infidelity csv")->required();
    reconstruct->add_option("--method", rec_method, "svd | co");
    reconstruct->add_option("--partition", rec_partition, "frequency partition json")
        ->required();
    reconstruct->add_option("--lambda", rec_lambda, "co hyperparameter (default: L-curve)");
    reconstruct->add_option("--cutoff", rec_cutoff, "svd relative cutoff");
    reconstruct->add_option("--samples", rec_samples, "filter time samples");
    reconstruct->add_option("--out", rec_out, "output csv");

    // identify
    auto* identify_cmd = app.add_subcommand("identify", "hamiltonian parameter estimation");
    std::string id_experiments, id_data, id_out = "estimate.json";
    int id_starts = 30;
    uint64_t id_seed = 0;
    identify_cmd->add_option("--experiments", id_experiments, "experiments json")->required();
    identify_cmd->add_option("--data", id_data, "data csv (y, dy)")->required();
    identify_cmd->add_option("--starts", id_starts, "optimizer starts");
    identify_cmd->add_option("--seed", id_seed, "rng seed")->required();
    identify_cmd->add_option("--out", id_out, "estimate json");

    // scenario build
    auto* scenario = app.add_subcommand("scenario", "bundled physical systems");
    auto* build = scenario->add_subcommand("build", "emit scenario artifacts");
    std::string sc_name, sc_params, sc_out = "problem.json";
    uint64_t sc_seed = 0;
    build->add_option("name", sc_name, "scenario name")->required();
    build->add_option("--params", sc_params, "inline json or params file");
    build->add_option("--out", sc_out, "primary output path");
    build->add_option("--seed", sc_seed, "rng seed for synthesized data");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (threads > 0) set_thread_count(threads);

    try {
        if (simulate->parsed()) {
            ManifestWriter manifest("simulate", argc, argv);
            manifest.input(sim_control);
            if (!sim_channels.empty()) manifest.input(sim_channels);
            if (!sim_times.empty()) manifest.input(sim_times);
            manifest.config("seed", sim_seed);
            manifest.config("trials", sim_trials);
            return run_simulate(sim_control, sim_channels, sim_seed, sim_trials, sim_times,
                                sim_out, manifest);
        }
        if (ff->parsed()) {
            ManifestWriter manifest("filter-function", argc, argv);
            manifest.input(ff_control);
            manifest.input(ff_op);
            if (!ff_projector.empty()) manifest.input(ff_projector);
            manifest.input(ff_freqs);
            return run_filter_function(ff_control, ff_op, ff_projector, ff_freqs, ff_samples,
                                       hz, ff_out, manifest);
        }
        if (optimize->parsed()) {
            ManifestWriter manifest("optimize", argc, argv);
            manifest.input(opt_problem);
            manifest.config("seed", opt_seed);
            return run_optimize(opt_problem, opt_starts, opt_seed, opt_out, manifest);
        }
        if (reconstruct->parsed()) {
            ManifestWriter manifest("reconstruct", argc, argv);
            if (!rec_sensitivity.empty()) manifest.input(rec_sensitivity);
            manifest.input(rec_infidelities);
            manifest.input(rec_partition);
            return run_reconstruct(rec_sensitivity, rec_controls, rec_noise_ops,
                                   rec_infidelities, rec_method, rec_partition, rec_lambda,
                                   rec_cutoff, rec_samples, hz, rec_out, manifest);
        }
        if (identify_cmd->parsed()) {
            ManifestWriter manifest("identify", argc, argv);
            manifest.input(id_experiments);
            manifest.input(id_data);
            manifest.config("seed", id_seed);
            manifest.config("starts", id_starts);
            return run_identify(id_experiments, id_data, id_starts, id_seed, id_out, manifest);
        }
        if (scenario->parsed()) {
            if (!build->parsed()) {
                std::cerr << "scenario: expected 'build' subcommand\n";
                return 2;
            }
            ManifestWriter manifest("scenario build", argc, argv);
            manifest.config("seed", sc_seed);
            return run_scenario_build(sc_name, sc_params, sc_out, sc_seed, manifest);
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
