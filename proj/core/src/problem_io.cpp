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

#include "qctrlkit/problem_io.hpp"

#include <fstream>

#include <json.hpp>

namespace qctrlkit {

namespace {

using nlohmann::json;

double number(const json& j, const char* what) {
    if (!j.is_number()) throw ConfigError(std::string("problem json: expected number for ") + what);
    return j.get<double>();
}

RealVector real_vector(const json& j, const char* what) {
    if (!j.is_array()) throw ConfigError(std::string("problem json: expected array for ") + what);
    RealVector out(static_cast<Eigen::Index>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) out[static_cast<Eigen::Index>(i)] = number(j[i], what);
    return out;
}

Complex complex_value(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2) {
        throw ConfigError(std::string("problem json: complex values are [re, im] for ") + what);
    }
    return Complex(number(j[0], what), number(j[1], what));
}

Vector complex_vector(const json& j, const char* what) {
    if (!j.is_array()) throw ConfigError(std::string("problem json: expected array for ") + what);
    Vector out(static_cast<Eigen::Index>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = complex_value(j[i], what);
    }
    return out;
}

Matrix complex_matrix(const json& j, const char* what) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError(std::string("problem json: expected matrix for ") + what);
    }
    const size_t rows = j.size();
    const size_t cols = j[0].size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols) {
            throw ConfigError(std::string("problem json: ragged matrix for ") + what);
        }
        for (size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                complex_value(j[i][c], what);
        }
    }
    return m;
}

RealMatrix real_matrix(const json& j, const char* what) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError(std::string("problem json: expected matrix for ") + what);
    }
    const size_t rows = j.size();
    const size_t cols = j[0].size();
    RealMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t i = 0; i < rows; ++i) {
        for (size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                number(j[i][c], what);
        }
    }
    return m;
}

Projector projector_from(const json& node, int dimension) {
    if (node.contains("projector")) {
        std::vector<int> diag;
        for (const auto& v : node["projector"]) diag.push_back(v.get<int>());
        return Projector(diag);
    }
    return Projector::full(dimension);
}

std::vector<double> double_list(const json& j) {
    std::vector<double> out;
    for (const auto& v : j) out.push_back(v.get<double>());
    return out;
}

}  // namespace

GraphProblem problem_from_json_text(const std::string& text) try {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("problem json: parse failure: ") + e.what());
    }
    if (!doc.contains("variables") || !doc.contains("nodes")) {
        throw ConfigError("problem json: requires 'variables' and 'nodes'");
    }

    const json& vars = doc["variables"];
    const int n_vars = vars.at("count").get<int>();

    GraphProblem problem;
    problem.graph = graph::CostGraph(n_vars);
    if (vars.contains("lower")) {
        problem.bounds = Bounds(real_vector(vars["lower"], "lower"),
                                real_vector(vars["upper"], "upper"));
    } else {
        problem.bounds = Bounds::uniform(n_vars, -1.0, 1.0);
    }
    if (problem.bounds.size() != n_vars) {
        throw ConfigError("problem json: bounds length does not match variable count");
    }
    if (vars.contains("initial_lower")) {
        problem.initial_window = Bounds(real_vector(vars["initial_lower"], "initial_lower"),
                                        real_vector(vars["initial_upper"], "initial_upper"));
        if (problem.initial_window->size() != n_vars) {
            throw ConfigError("problem json: initial window length mismatch");
        }
    }

    // Node ids must be 1..N in order (0 is the variable vector).
    std::map<int, int> id_map;
    id_map[0] = 0;
    for (const auto& node : doc["nodes"]) {
        const std::string op = node.at("op").get<std::string>();
        std::vector<int> inputs;
        if (node.contains("in")) {
            for (const auto& r : node["in"]) {
                const int ref = r.get<int>();
                const auto it = id_map.find(ref);
                if (it == id_map.end()) {
                    throw ConfigError("problem json: node references unknown id " +
                                      std::to_string(ref));
                }
                inputs.push_back(it->second);
            }
        }

        std::unique_ptr<graph::Node> built;
        if (op == "slice") {
            built = graph::make_slice(node.at("offset").get<int>(),
                                      node.at("length").get<int>());
        } else if (op == "const_real") {
            built = graph::make_const_real(real_vector(node.at("values"), "const_real"));
        } else if (op == "affine") {
            built = graph::make_affine(number(node.at("scale"), "scale"),
                                       number(node.at("shift"), "shift"));
        } else if (op == "mask") {
            built = graph::make_mask(real_vector(node.at("mask"), "mask"));
        } else if (op == "symmetrize") {
            built = graph::make_symmetrize();
        } else if (op == "linear_map") {
            built = graph::make_linear_map(real_matrix(node.at("matrix"), "linear_map"));
        } else if (op == "lti_filter") {
            const std::string kernel = node.at("kernel").get<std::string>();
            const double tau = number(node.at("tau"), "tau");
            const int n_in = node.at("n_in").get<int>();
            const int n_out = node.at("n_out").get<int>();
            if (kernel == "samples") {
                built = graph::make_linear_map(graph::lti_filter_matrix_from_samples(
                    real_vector(node.at("values"), "kernel values"),
                    number(node.at("dt"), "kernel dt"), tau, n_in, n_out));
            } else {
                const double cutoff = number(node.at("cutoff"), "cutoff");
                const auto kind = kernel == "rc" ? graph::FilterKernel::RC
                                                 : graph::FilterKernel::Sinc;
                built = graph::make_linear_map(
                    graph::lti_filter_matrix(kind, cutoff, tau, n_in, n_out));
            }
        } else if (op == "crab") {
            const double tau = number(node.at("tau"), "tau");
            const int n_out = node.at("n_out").get<int>();
            if (node.contains("frequencies")) {
                built = graph::make_linear_map(graph::crab_basis_from_frequencies(
                    double_list(node["frequencies"]), tau, n_out));
            } else {
                built = graph::make_linear_map(graph::crab_fourier_basis(
                    node.at("n_basis").get<int>(), tau, n_out));
            }
        } else if (op == "concat") {
            built = graph::make_concat();
        } else if (op == "polar") {
            built = graph::make_polar();
        } else if (op == "cartesian") {
            built = graph::make_cartesian();
        } else if (op == "drive") {
            built = graph::make_drive_series(complex_matrix(node.at("operator"), "drive"),
                                             real_vector(node.at("durations"), "durations"));
        } else if (op == "shift") {
            built = graph::make_shift_series(complex_matrix(node.at("operator"), "shift"),
                                             real_vector(node.at("durations"), "durations"));
        } else if (op == "scaled_pwc") {
            built = graph::make_scaled_pwc(real_vector(node.at("base"), "base"));
        } else if (op == "const_series") {
            graph::Series s;
            s.durations = real_vector(node.at("durations"), "durations");
            if (node.contains("operators")) {
                for (const auto& m : node["operators"]) {
                    s.ops.push_back(complex_matrix(m, "const_series"));
                }
            } else {
                const Matrix m = complex_matrix(node.at("operator"), "const_series");
                s.ops.assign(static_cast<size_t>(s.durations.size()), m);
            }
            built = graph::make_const_series(std::move(s));
        } else if (op == "sum_series") {
            built = graph::make_sum_series();
        } else if (op == "unitary") {
            built = graph::make_unitary();
        } else if (op == "evolve_const") {
            Matrix h;
            if (node.contains("diagonal")) {
                const RealVector d = real_vector(node["diagonal"], "diagonal");
                h = Matrix::Zero(d.size(), d.size());
                for (Eigen::Index i = 0; i < d.size(); ++i) h(i, i) = d[i];
            } else {
                h = complex_matrix(node.at("operator"), "evolve_const");
            }
            built = graph::make_evolve_const(std::move(h));
        } else if (op == "product") {
            built = graph::make_product();
        } else if (op == "interleaved_evolution") {
            built = graph::make_interleaved_evolution(
                real_vector(node.at("diagonal"), "diagonal"));
        } else if (op == "kron") {
            built = graph::make_kron();
        } else if (op == "optimal_cost") {
            Matrix target;
            if (node.contains("target_diagonal")) {
                const Vector d = complex_vector(node["target_diagonal"], "target_diagonal");
                target = Matrix::Zero(d.size(), d.size());
                for (Eigen::Index i = 0; i < d.size(); ++i) target(i, i) = d[i];
            } else {
                target = complex_matrix(node.at("target"), "optimal_cost");
            }
            const Projector p = projector_from(node, static_cast<int>(target.rows()));
            built = graph::make_optimal_cost(std::move(target), p);
        } else if (op == "state_cost") {
            built = graph::make_state_cost(complex_vector(node.at("initial"), "initial"),
                                           complex_vector(node.at("target"), "target"));
        } else if (op == "expectation") {
            built = graph::make_expectation(complex_vector(node.at("state"), "state"),
                                            complex_matrix(node.at("observable"), "observable"));
        } else if (op == "filter_cost" || op == "quasi_static_cost" ||
                   op == "fixed_freq_cost" || op == "band_cost") {
            const Matrix n_op = complex_matrix(node.at("operator"), "noise operator");
            const Projector p = projector_from(node, static_cast<int>(n_op.rows()));
            const int samples = node.value("samples", 1000);
            if (op == "quasi_static_cost") {
                built = graph::make_quasi_static_cost(n_op, p, samples);
            } else if (op == "fixed_freq_cost") {
                built = graph::make_fixed_freq_cost(n_op, p, samples,
                                                    number(node.at("omega"), "omega"));
            } else if (op == "band_cost") {
                built = graph::make_band_cost(
                    n_op, p, samples, number(node.at("omega_min"), "omega_min"),
                    number(node.at("omega_max"), "omega_max"),
                    node.at("grid_points").get<int>(),
                    real_vector(node.at("psd"), "psd"));
            } else {
                built = graph::make_filter_cost(n_op, p, samples,
                                                double_list(node.at("frequencies")),
                                                double_list(node.at("weights")));
            }
        } else if (op == "duration_penalty") {
            built = graph::make_duration_penalty(number(node.at("tau_max"), "tau_max"),
                                                 number(node.at("weight"), "weight"));
        } else if (op == "sum_squares") {
            const RealVector targets = real_vector(node.at("targets"), "targets");
            const RealVector weights =
                node.contains("weights") ? real_vector(node["weights"], "weights")
                                         : RealVector(RealVector::Ones(targets.size()));
            built = graph::make_sum_squares(targets, weights);
        } else if (op == "sum_entries") {
            built = graph::make_sum_entries();
        } else if (op == "weighted_sum") {
            built = graph::make_weighted_sum(real_vector(node.at("weights"), "weights"));
        } else {
            throw ConfigError("problem json: unknown node op '" + op + "'");
        }

        const int new_id = problem.graph.add(std::move(built), inputs);
        if (node.contains("id")) id_map[node["id"].get<int>()] = new_id;
        if (node.contains("label")) {
            problem.node_labels[node["label"].get<std::string>()] = new_id;
        }
    }

    if (doc.contains("output")) {
        const int ref = doc["output"].get<int>();
        const auto it = id_map.find(ref);
        if (it == id_map.end()) throw ConfigError("problem json: unknown output id");
        problem.graph.set_output(it->second);
    }
    if (doc.contains("stop")) {
        const json& stop = doc["stop"];
        problem.stop.max_iterations = stop.value("max_iterations", 10000);
        problem.stop.gradient_tolerance = stop.value("gradient_tolerance", 1e-5);
        problem.stop.cost_tolerance = stop.value("cost_tolerance", 0.0);
    }
    problem.default_starts = doc.value("starts", 1);
    if (doc.contains("metadata")) {
        for (const auto& [key, value] : doc["metadata"].items()) {
            if (value.is_number()) problem.metadata_numbers[key] = value.get<double>();
        }
    }
    return problem;
} catch (const json::exception& e) {
    throw ConfigError(std::string("problem json: ") + e.what());
}

GraphProblem problem_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open problem file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return problem_from_json_text(text);
}

}  // namespace qctrlkit
