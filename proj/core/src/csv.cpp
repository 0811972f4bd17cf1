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

#include "qctrlkit/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qctrlkit {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::vector<double>> read_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open csv file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                size_t used = 0;
                const double v = std::stod(cell, &used);
                // the whole cell must parse ("infidelity" starts with "inf")
                while (used < cell.size() &&
                       std::isspace(static_cast<unsigned char>(cell[used]))) {
                    ++used;
                }
                if (used != cell.size()) {
                    numeric = false;
                    break;
                }
                row.push_back(v);
            } catch (...) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;  // header row
            }
            throw IoError("csv parse failure in " + path + ": '" + line + "'");
        }
        first = false;
        if (!row.empty()) rows.push_back(std::move(row));
    }
    return rows;
}

double uniform_spacing(const std::vector<std::vector<double>>& rows, const std::string& path) {
    if (rows.size() < 2) throw IoError("csv needs at least two rows: " + path);
    const double step = rows[1][0] - rows[0][0];
    if (!(step > 0.0)) throw IoError("csv first column must be increasing: " + path);
    for (size_t i = 1; i < rows.size(); ++i) {
        const double d = rows[i][0] - rows[i - 1][0];
        if (std::abs(d - step) > 1e-6 * step) {
            throw IoError("csv first column must be uniformly spaced: " + path);
        }
    }
    return step;
}

}  // namespace

void write_psd_csv(const std::string& path, const OneSidedPsd& psd) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write csv file: " + path);
    out << "omega_rad_per_s,psd_value\n";
    for (int k = 0; k < psd.size(); ++k) {
        out << format_double(k * psd.delta_omega) << "," << format_double(psd.samples[k])
            << "\n";
    }
}

OneSidedPsd read_psd_csv(const std::string& path) {
    const auto rows = read_rows(path);
    const double delta = uniform_spacing(rows, path);
    if (std::abs(rows[0][0]) > 1e-9 * delta) {
        throw IoError("psd csv must start at omega = 0: " + path);
    }
    RealVector samples(static_cast<Eigen::Index>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() < 2) throw IoError("psd csv needs two columns: " + path);
        samples[static_cast<Eigen::Index>(i)] = rows[i][1];
    }
    return OneSidedPsd(std::move(samples), delta);
}

void write_series_csv(const std::string& path, const NoiseTimeSeries& series) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write csv file: " + path);
    out << "t_seconds,value\n";
    for (int j = 0; j < series.size(); ++j) {
        out << format_double(j * series.dt) << "," << format_double(series.samples[j]) << "\n";
    }
}

NoiseTimeSeries read_series_csv(const std::string& path) {
    const auto rows = read_rows(path);
    const double dt = uniform_spacing(rows, path);
    RealVector samples(static_cast<Eigen::Index>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() < 2) throw IoError("series csv needs two columns: " + path);
        samples[static_cast<Eigen::Index>(i)] = rows[i][1];
    }
    return NoiseTimeSeries(std::move(samples), dt);
}

RealVector read_column_csv(const std::string& path, int column) {
    const auto rows = read_rows(path);
    RealVector out(static_cast<Eigen::Index>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<int>(rows[i].size()) <= column) {
            throw IoError("csv row too short in " + path);
        }
        out[static_cast<Eigen::Index>(i)] = rows[i][static_cast<size_t>(column)];
    }
    return out;
}

void write_matrix_csv(const std::string& path, const RealMatrix& m,
                      const std::string& header) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write csv file: " + path);
    if (!header.empty()) out << header << "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out << format_double(m(i, j)) << (j + 1 < m.cols() ? "," : "");
        }
        out << "\n";
    }
}

RealMatrix read_matrix_csv(const std::string& path) {
    const auto rows = read_rows(path);
    if (rows.empty()) throw IoError("empty csv matrix: " + path);
    const size_t cols = rows[0].size();
    RealMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) throw IoError("ragged csv matrix: " + path);
        for (size_t j = 0; j < cols; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return m;
}

void write_columns_csv(const std::string& path, const std::string& header,
                       const std::vector<RealVector>& columns) {
    if (columns.empty()) throw ConfigError("write_columns_csv: no columns");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write csv file: " + path);
    out << header << "\n";
    const Eigen::Index n = columns.front().size();
    for (const auto& c : columns) {
        if (c.size() != n) throw ConfigError("write_columns_csv: ragged columns");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (size_t c = 0; c < columns.size(); ++c) {
            out << format_double(columns[c][i]) << (c + 1 < columns.size() ? "," : "");
        }
        out << "\n";
    }
}

}  // namespace qctrlkit
