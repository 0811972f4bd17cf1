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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qctrlkit/serialization.hpp"

namespace {

namespace fs = std::filesystem;

struct Workspace {
    fs::path dir;
    Workspace() {
        dir = fs::temp_directory_path() / ("qctrlkit_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~Workspace() { fs::remove_all(dir); }
    std::string file(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args) {
    const std::string cmd = std::string(QCTRLKIT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("scenario build emits a control document that round-trips") {
    Workspace ws;
    const std::string out = ws.file("problem.json");
    const int code = run("scenario build cpmg --params '{\"order\":4,\"duration\":3e-6}' --out " + out);
    CHECK(code == 0);
    REQUIRE(fs::exists(out));
    const qctrlkit::ControlSolution ctrl = qctrlkit::control_from_json_file(out);
    CHECK(ctrl.duration == 3e-6);
    CHECK(ctrl.dimension == 2);
    // manifest written alongside
    CHECK(fs::exists(ws.file("problem.manifest.json")));
}

TEST_CASE("unknown subcommand and missing seed are usage errors") {
    CHECK(run("frobnicate") == 2);
    Workspace ws;
    const std::string out = ws.file("c.json");
    REQUIRE(run("scenario build cpmg --params '{\"order\":1,\"duration\":1e-6}' --out " + out) == 0);
    // simulate without --seed must fail with a usage error
    CHECK(run("simulate --control " + out + " --out " + ws.file("sim")) == 2);
    // unknown scenario is a config error
    CHECK(run("scenario build nonsense --out " + ws.file("x.json")) == 2);
    // missing file is an i/o error
    CHECK(run("simulate --control " + ws.file("missing.json") + " --seed 1 --out " +
              ws.file("sim")) == 4);
}

TEST_CASE("simulate twice with the same seed is byte-identical") {
    Workspace ws;
    const std::string control = ws.file("control.json");
    REQUIRE(run("scenario build cpmg --params '{\"order\":2,\"duration\":1e-6}' --out " +
                control) == 0);

    // flat dephasing psd channel
    std::ofstream psd(ws.file("psd.csv"));
    psd << "omega_rad_per_s,psd_value\n";
    for (int k = 0; k < 24; ++k) psd << k * 2.0e5 << "," << 2e-9 << "\n";
    psd.close();
    std::ofstream channels(ws.file("channels.json"));
    channels << R"({"channels": [{"coupling": "additive", "duration": 1e-6,
        "operator": [[[0.5,0],[0,0]],[[0,0],[-0.5,0]]],
        "psd_file": "psd.csv"}]})";
    channels.close();

    const std::string base = "simulate --control " + control + " --channels " +
                             ws.file("channels.json") + " --trials 8 --seed 77 --out ";
    REQUIRE(run(base + ws.file("a")) == 0);
    REQUIRE(run(base + ws.file("b")) == 0);
    CHECK(slurp(ws.file("a.populations.csv")) == slurp(ws.file("b.populations.csv")));
    CHECK(slurp(ws.file("a.rho.json")) == slurp(ws.file("b.rho.json")));
    CHECK(!slurp(ws.file("a.populations.csv")).empty());

    // different seed changes the realization
    REQUIRE(run("simulate --control " + control + " --channels " + ws.file("channels.json") +
                " --trials 8 --seed 78 --out " + ws.file("c")) == 0);
    CHECK(slurp(ws.file("a.rho.json")) != slurp(ws.file("c.rho.json")));
}

TEST_CASE("filter-function command emits the csv") {
    Workspace ws;
    const std::string control = ws.file("control.json");
    REQUIRE(run("scenario build cpmg --params '{\"order\":1,\"duration\":1e-6}' --out " +
                control) == 0);
    std::ofstream freqs(ws.file("freqs.csv"));
    freqs << "omega_rad_per_s\n";
    for (int k = 0; k <= 20; ++k) freqs << k * 3.0e5 << "\n";
    freqs.close();

    const int code = run("filter-function --control " + control + " --noise-operator " +
                         ws.file("control.noise_op.json") + " --freqs " + ws.file("freqs.csv") +
                         " --samples 801 --out " + ws.file("ff.csv"));
    CHECK(code == 0);
    const std::string out = slurp(ws.file("ff.csv"));
    CHECK(out.find("omega_rad_per_s,filter_value") == 0);
}

TEST_CASE("optimize and identify commands run end to end") {
    Workspace ws;
    // tiny hadamard problem
    REQUIRE(run("scenario build hadamard4q --params '{\"segments\":4}' --out " +
                ws.file("ham.json")) == 0);
    REQUIRE(run("optimize --problem " + ws.file("ham.json") +
                " --starts 1 --seed 5 --out " + ws.file("result.json")) == 0);
    CHECK(slurp(ws.file("result.json")).find("best_cost") != std::string::npos);

    // identification round trip via synthesized data
    REQUIRE(run("scenario build three-axis --params "
                "'{\"points\":6,\"max_wait\":1e-6,\"truth\":[3141592.6,6283185.3,9424777.9],"
                "\"sigma\":0.01}' --seed 3 --out " +
                ws.file("exps.json")) == 0);
    REQUIRE(fs::exists(ws.file("exps.data.csv")));
    REQUIRE(run("identify --experiments " + ws.file("exps.json") + " --data " +
                ws.file("exps.data.csv") + " --starts 4 --seed 9 --out " +
                ws.file("estimate.json")) == 0);
    CHECK(slurp(ws.file("estimate.json")).find("theta") != std::string::npos);
}

TEST_CASE("reconstruct command by method") {
    Workspace ws;
    // synthetic 4x4 identity sensitivity
    std::ofstream f(ws.file("F.csv"));
    f << "sensitivity\n";
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) f << (i == j ? 1.0 : 0.0) << (j < 3 ? "," : "");
        f << "\n";
    }
    f.close();
    std::ofstream infid(ws.file("I.csv"));
    infid << "infidelity\n0.1\n0.2\n0.15\n0.12\n";
    infid.close();
    std::ofstream part(ws.file("part.json"));
    part << R"({"channels": [{"omega_min": 0.0, "omega_max": 3.0, "samples": 4}]})";
    part.close();

    REQUIRE(run("reconstruct --sensitivity " + ws.file("F.csv") + " --infidelities " +
                ws.file("I.csv") + " --partition " + ws.file("part.json") +
                " --method svd --out " + ws.file("psd_svd.csv")) == 0);
    const std::string svd = slurp(ws.file("psd_svd.csv"));
    CHECK(svd.find("channel,omega_rad_per_s,psd_value") == 0);
    CHECK(svd.find("0.1") != std::string::npos);

    REQUIRE(run("reconstruct --sensitivity " + ws.file("F.csv") + " --infidelities " +
                ws.file("I.csv") + " --partition " + ws.file("part.json") +
                " --method co --lambda 0 --out " + ws.file("psd_co.csv")) == 0);
    CHECK(!slurp(ws.file("psd_co.csv")).empty());
}
