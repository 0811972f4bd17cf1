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

#include "qctrlkit/serialization.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "qctrlkit/csv.hpp"

namespace qctrlkit {

namespace {

using nlohmann::json;

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2) {
        throw ConfigError(std::string("json: complex values are [re, im] arrays for ") + what);
    }
    return Complex(j[0].get<double>(), j[1].get<double>());
}

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

Matrix matrix_from(const json& j, const char* what) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError(std::string("json: expected matrix for ") + what);
    }
    const size_t rows = j.size();
    const size_t cols = j[0].size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
            throw ConfigError(std::string("json: ragged matrix for ") + what);
        }
        for (size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                complex_from(j[r][c], what);
        }
    }
    return m;
}

Vector vector_from(const json& j, const char* what) {
    if (!j.is_array()) throw ConfigError(std::string("json: expected vector for ") + what);
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = complex_from(j[i], what);
    }
    return v;
}

std::vector<double> durations_from(const json& j) {
    std::vector<double> out;
    for (const auto& v : j) out.push_back(v.get<double>());
    return out;
}

json durations_json(const Segmentation& seg) {
    json out = json::array();
    for (double d : seg.durations()) out.push_back(d);
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

json parse(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(what + ": json parse failure: " + e.what());
    }
}

OneSidedPsd psd_from(const json& j) {
    RealVector samples(static_cast<Eigen::Index>(j.at("values").size()));
    for (size_t i = 0; i < j["values"].size(); ++i) {
        samples[static_cast<Eigen::Index>(i)] = j["values"][i].get<double>();
    }
    return OneSidedPsd(std::move(samples), j.at("delta_omega").get<double>());
}

NoiseTimeSeries series_from(const json& j) {
    RealVector samples(static_cast<Eigen::Index>(j.at("values").size()));
    for (size_t i = 0; i < j["values"].size(); ++i) {
        samples[static_cast<Eigen::Index>(i)] = j["values"][i].get<double>();
    }
    return NoiseTimeSeries(std::move(samples), j.at("dt").get<double>());
}


template <typename Fn>
auto translate_json_errors(const char* what, Fn&& fn) {
    try {
        return fn();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
}

}  // namespace

std::string control_to_json(const ControlSolution& ctrl) {
    json doc;
    doc["dimension"] = ctrl.dimension;
    doc["duration"] = ctrl.duration;
    doc["drives"] = json::array();
    for (const auto& d : ctrl.drives) {
        json values = json::array();
        for (Eigen::Index i = 0; i < d.pulse.values.size(); ++i) {
            values.push_back(complex_json(d.pulse.values[i]));
        }
        doc["drives"].push_back({{"values", values},
                                 {"durations", durations_json(d.pulse.segmentation)},
                                 {"operator", matrix_json(d.op)}});
    }
    doc["shifts"] = json::array();
    for (const auto& s : ctrl.shifts) {
        json values = json::array();
        for (Eigen::Index i = 0; i < s.pulse.values.size(); ++i) {
            values.push_back(s.pulse.values[i]);
        }
        doc["shifts"].push_back({{"values", values},
                                 {"durations", durations_json(s.pulse.segmentation)},
                                 {"operator", matrix_json(s.op)}});
    }
    doc["drift"] = matrix_json(ctrl.drift);
    return doc.dump(2);
}

ControlSolution control_from_json_text(const std::string& text) {
    return translate_json_errors("control json", [&] {
        const json doc = parse(text, "control");
        const double duration = doc.at("duration").get<double>();
    
        std::vector<DriveTerm> drives;
        if (doc.contains("drives")) {
            for (const auto& d : doc["drives"]) {
                Vector values(static_cast<Eigen::Index>(d.at("values").size()));
                for (size_t i = 0; i < d["values"].size(); ++i) {
                    values[static_cast<Eigen::Index>(i)] = complex_from(d["values"][i], "drive");
                }
                drives.emplace_back(
                    ComplexPwc(std::move(values), Segmentation(durations_from(d.at("durations")))),
                    matrix_from(d.at("operator"), "drive operator"));
            }
        }
        std::vector<ShiftTerm> shifts;
        if (doc.contains("shifts")) {
            for (const auto& s : doc["shifts"]) {
                RealVector values(static_cast<Eigen::Index>(s.at("values").size()));
                for (size_t i = 0; i < s["values"].size(); ++i) {
                    values[static_cast<Eigen::Index>(i)] = s["values"][i].get<double>();
                }
                shifts.emplace_back(
                    RealPwc(std::move(values), Segmentation(durations_from(s.at("durations")))),
                    matrix_from(s.at("operator"), "shift operator"));
            }
        }
        Matrix drift = matrix_from(doc.at("drift"), "drift");
        ControlSolution ctrl(std::move(drives), std::move(shifts), std::move(drift), duration);
        if (doc.contains("dimension") && doc["dimension"].get<int>() != ctrl.dimension) {
            throw ConfigError("control json: declared dimension does not match operators");
        }
        return ctrl;
    });
}

ControlSolution control_from_json_file(const std::string& path) {
    return control_from_json_text(read_file(path));
}

std::vector<NoiseChannel> channels_from_json_text(const std::string& text,
                                                  const std::string& base_dir) {
    return translate_json_errors("channels json", [&] {
        const json doc = parse(text, "channels");
        if (!doc.contains("channels")) throw ConfigError("channels json: missing 'channels'");
    
        auto resolve = [&](const std::string& rel) {
            const std::filesystem::path p(rel);
            if (p.is_absolute()) return rel;
            return (std::filesystem::path(base_dir) / p).string();
        };
    
        std::vector<NoiseChannel> out;
        for (const auto& c : doc["channels"]) {
            const std::string coupling = c.at("coupling").get<std::string>();
            NoiseChannel channel;
            if (coupling == "additive") {
                channel.coupling = NoiseCoupling::Additive;
            } else if (coupling == "drive") {
                channel.coupling = NoiseCoupling::DriveModulus;
                channel.target_index = c.at("index").get<int>();
            } else if (coupling == "shift") {
                channel.coupling = NoiseCoupling::Shift;
                channel.target_index = c.at("index").get<int>();
            } else {
                throw ConfigError("channels json: unknown coupling '" + coupling + "'");
            }
    
            if (coupling == "additive") {
                if (!c.contains("operator") && !c.contains("operators")) {
                    throw ConfigError("channels json: additive channel requires an operator");
                }
                if (c.contains("operators")) {
                    std::vector<Matrix> ops;
                    for (const auto& m : c["operators"]) {
                        ops.push_back(matrix_from(m, "noise operator"));
                    }
                    channel.op = OperatorSeries(
                        std::move(ops), Segmentation(durations_from(c.at("durations"))));
                } else {
                    channel.op = OperatorSeries::constant(
                        matrix_from(c["operator"], "noise operator"),
                        c.value("duration", 1.0));
                }
            }
    
            if (c.contains("psd")) {
                channel.source = psd_from(c["psd"]);
            } else if (c.contains("psd_file")) {
                channel.source = read_psd_csv(resolve(c["psd_file"].get<std::string>()));
            } else if (c.contains("series")) {
                channel.source = series_from(c["series"]);
            } else if (c.contains("series_file")) {
                channel.source = read_series_csv(resolve(c["series_file"].get<std::string>()));
            } else {
                throw ConfigError("channels json: channel needs a psd or series source");
            }
            out.push_back(std::move(channel));
        }
        return out;
    });
}

std::vector<NoiseChannel> channels_from_json_file(const std::string& path) {
    return channels_from_json_text(read_file(path),
                                   std::filesystem::path(path).parent_path().string());
}

OperatorSeries operator_series_from_json_file(const std::string& path, double duration) {
    return translate_json_errors("noise operator json", [&] {
        const json doc = parse(read_file(path), "noise operator");
        if (doc.contains("operators")) {
            std::vector<Matrix> ops;
            for (const auto& m : doc["operators"]) ops.push_back(matrix_from(m, "operator"));
            return OperatorSeries(std::move(ops), Segmentation(durations_from(doc.at("durations"))));
        }
        return OperatorSeries::constant(matrix_from(doc.at("operator"), "operator"), duration);
    });
}

Projector projector_from_json_file(const std::string& path) {
    return translate_json_errors("projector json", [&] {
        const json doc = parse(read_file(path), "projector");
        std::vector<int> diag;
        for (const auto& v : doc.at("diagonal")) diag.push_back(v.get<int>());
        return Projector(std::move(diag));
    });
}

FrequencyPartition partition_from_json_file(const std::string& path) {
    return translate_json_errors("partition json", [&] {
        const json doc = parse(read_file(path), "partition");
        std::vector<ChannelBand> bands;
        for (const auto& c : doc.at("channels")) {
            bands.push_back(ChannelBand{c.at("omega_min").get<double>(),
                                        c.at("omega_max").get<double>(),
                                        c.at("samples").get<int>()});
        }
        return FrequencyPartition(std::move(bands));
    });
}

std::vector<ExperimentSpec> experiments_from_json_file(const std::string& path) {
    return translate_json_errors("experiments json", [&] {
        const json doc = parse(read_file(path), "experiments");
        std::vector<ExperimentSpec> out;
        for (const auto& e : doc.at("experiments")) {
            std::vector<Matrix> params;
            for (const auto& q : e.at("parameter_operators")) {
                params.push_back(matrix_from(q, "parameter operator"));
            }
            std::optional<Matrix> q0;
            if (e.contains("constant_operator")) {
                q0 = matrix_from(e["constant_operator"], "constant operator");
            }
            RealVector pulse_values(static_cast<Eigen::Index>(e.at("pulse").at("values").size()));
            for (size_t i = 0; i < e["pulse"]["values"].size(); ++i) {
                pulse_values[static_cast<Eigen::Index>(i)] =
                    e["pulse"]["values"][i].get<double>();
            }
            out.emplace_back(e.at("duration").get<double>(),
                             vector_from(e.at("initial_state"), "initial state"),
                             matrix_from(e.at("observable"), "observable"),
                             RealPwc(std::move(pulse_values),
                                     Segmentation(durations_from(e["pulse"].at("durations")))),
                             std::move(params), std::move(q0));
        }
        return out;
    });
}

Bounds experiment_bounds_from_json_file(const std::string& path) {
    return translate_json_errors("experiments json", [&] {
        const json doc = parse(read_file(path), "experiments");
        const json& p = doc.at("parameters");
        const int n = p.at("count").get<int>();
        RealVector lo(n), hi(n);
        for (int i = 0; i < n; ++i) {
            lo[i] = p.at("lower")[static_cast<size_t>(i)].get<double>();
            hi[i] = p.at("upper")[static_cast<size_t>(i)].get<double>();
        }
        return Bounds(std::move(lo), std::move(hi));
    });
}

std::string estimate_to_json(const EstimationResult& result) {
    json doc;
    doc["theta"] = json::array();
    for (Eigen::Index i = 0; i < result.theta.size(); ++i) doc["theta"].push_back(result.theta[i]);
    doc["cost"] = result.best_cost;
    doc["starts"] = result.starts;
    doc["seed"] = result.seed;
    doc["covariance_available"] = result.covariance_available;
    if (result.covariance_available) {
        json cov = json::array();
        for (Eigen::Index i = 0; i < result.covariance.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index j = 0; j < result.covariance.cols(); ++j) {
                row.push_back(result.covariance(i, j));
            }
            cov.push_back(row);
        }
        doc["covariance"] = cov;
        doc["delta_theta"] = json::array();
        for (Eigen::Index i = 0; i < result.error_bars.size(); ++i) {
            doc["delta_theta"].push_back(result.error_bars[i]);
        }
    }
    return doc.dump(2);
}

std::string density_matrix_to_json(const EnsembleDensityMatrix& rho) {
    json doc;
    doc["trials"] = rho.trials;
    doc["rho"] = matrix_json(rho.rho);
    return doc.dump(2);
}

}  // namespace qctrlkit
