// Copyright 2026 The simqppo Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "simqppo/experiment.hpp"

using namespace simqppo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("simqppo_test_" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    [[nodiscard]] std::string operator/(const std::string &name) const { return (path / name).string(); }
};

std::string slurp(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spit(const std::string &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

ExperimentConfig tiny() { return load_config(std::string(SIMQPPO_SOURCE_DIR) + "/configs/tiny.json"); }

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli(const TempDir &dir, const std::string &args) {
    const std::string out = dir / "stdout.txt";
    const std::string err = dir / "stderr.txt";
    const std::string cmd = std::string("'") + SIMQPPO_CLI_PATH + "' " + args + " >'" + out +
                            "' 2>'" + err + "'";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string write_config(const TempDir &dir, const ExperimentConfig &cfg, const std::string &name) {
    const std::string p = dir / name;
    spit(p, serialize(cfg));
    return p;
}

} // namespace

TEST_CASE("shipped configs parse and validate") {
    for (const char *name : {"full.json", "desk.json", "tiny.json"}) {
        INFO(name);
        const ExperimentConfig c = load_config(std::string(SIMQPPO_SOURCE_DIR) + "/configs/" + name);
        CHECK_NOTHROW(c.validate());
    }
    const ExperimentConfig full = load_config(std::string(SIMQPPO_SOURCE_DIR) + "/configs/full.json");
    CHECK(full.geometry.atoms_per_layer == 25);
    CHECK(full.geometry.num_layers == 3);
    CHECK(full.geometry.num_users == 3);
    CHECK(full.agent.qubits == 5);
}

TEST_CASE("config round trip") {
    ExperimentConfig c = tiny();
    c.env.min_rate = 0.125;
    c.agent.post_hidden = {9, 4};
    c.run.seed = 123456789012345ULL;
    const ExperimentConfig back = parse_config(serialize(c));
    CHECK(back == c);
    CHECK(serialize(back) == serialize(c));
}

TEST_CASE("config unit conversions") {
    ExperimentConfig c = tiny();
    c.env.max_power_dbm = 10.0;
    c.channel.user_noise_dbm = -104.0;
    c.channel.rician_factor_db = -30.0;
    c.channel.ref_path_loss_db = -35.0;
    CHECK(c.env_config().max_power == Catch::Approx(0.01).epsilon(1e-12));
    CHECK(c.channel_params().noise_power_user == Catch::Approx(std::pow(10.0, -13.4)).epsilon(1e-12));
    CHECK(c.channel_params().rician_factor == Catch::Approx(1e-3).epsilon(1e-12));
    CHECK(c.channel_params().ref_path_loss == Catch::Approx(std::pow(10.0, -3.5)).epsilon(1e-12));
}

TEST_CASE("config errors name the offending field") {
    const std::string good = serialize(tiny());
    const auto field_of = [](const std::string &text) {
        try {
            parse_config(text);
        } catch (const ConfigError &e) {
            return e.field();
        }
        return std::string("<none>");
    };
    nlohmann::json j = nlohmann::json::parse(good);
    j["geometry"].erase("wavelength");
    CHECK(field_of(j.dump()) == "geometry.wavelength");

    j = nlohmann::json::parse(good);
    j["ppo"]["learning_rate"] = 1e-3;
    CHECK(field_of(j.dump()) == "ppo.learning_rate");

    j = nlohmann::json::parse(good);
    j["geometry"]["num_users"] = 3;
    CHECK(field_of(j.dump()) == "geometry.num_users");

    j = nlohmann::json::parse(good);
    j["geometry"]["atoms_per_layer"] = 10;
    CHECK(field_of(j.dump()) == "geometry.atoms_per_layer");

    j = nlohmann::json::parse(good);
    j["agent"]["qubits"] = 13;
    CHECK(field_of(j.dump()) == "agent.qubits");

    j = nlohmann::json::parse(good);
    j["env"]["horizon"] = "twenty";
    CHECK(field_of(j.dump()) == "env.horizon");

    CHECK(field_of("{not json") == "<document>");
}

TEST_CASE("CLI rejects a config with a missing field") {
    TempDir dir;
    nlohmann::json j = to_json(tiny());
    j["channel"].erase("csi_uncertainty");
    spit(dir / "bad.json", j.dump());
    const CliResult r = cli(dir, "train --config '" + (dir / "bad.json") + "' --out '" + (dir / "run") + "'");
    CHECK(r.code == 2);
    CHECK(r.err.find("channel.csi_uncertainty") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "run/metrics.csv"));

    CHECK(cli(dir, "train").code == 2);
    CHECK(cli(dir, "frobnicate").code == 2);
    CHECK(cli(dir, "train --config '" + (dir / "absent.json") + "'").code == 3);
}

TEST_CASE("metrics CSV schema") {
    ppo::MetricsRow r;
    r.iteration = 3;
    r.env_steps = 3072;
    r.mean_asr = 0.1 + 1e-17;
    r.mean_reward = 1.0 / 3.0;
    r.jain = 0.75;
    r.qos_violation_rate = 0.5;
    r.surrogate_loss = -0.01;
    r.value_loss = 2e-9;
    r.entropy = 12.5;
    r.clip_fraction = 0.125;
    r.wall_seconds = 4.5;
    std::stringstream ss;
    write_metrics_header(ss);
    ss << metrics_line(r) << "\n";
    const auto rows = parse_metrics_csv(ss, "mem");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].mean_reward == r.mean_reward);
    CHECK(rows[0].value_loss == r.value_loss);
    CHECK(rows[0].env_steps == 3072);
    CHECK(rows[0].wall_seconds == 4.5);

    std::stringstream bad("iteration,env_steps\n1,2\n");
    CHECK_THROWS_AS(parse_metrics_csv(bad, "bad"), SchemaError);
    std::stringstream short_row(std::string(kMetricsVersionLine) + "\n" + kMetricsHeader + "\n1,2,3\n");
    CHECK_THROWS_AS(parse_metrics_csv(short_row, "short"), SchemaError);

    CHECK(strip_timing_columns("# v\na,b,c\n1,2,3\n") == "# v\na,b\n1,2\n");
}

TEST_CASE("training through the CLI is reproducible") {
    TempDir dir;
    ExperimentConfig c = tiny();
    c.agent.kind = "classical";
    const std::string cfg = write_config(dir, c, "cfg.json");
    const CliResult a = cli(dir, "train --quiet --config '" + cfg + "' --seed 7 --out '" + (dir / "a") + "'");
    REQUIRE(a.code == 0);
    const CliResult b = cli(dir, "train --quiet --config '" + cfg + "' --seed 7 --out '" + (dir / "b") + "'");
    REQUIRE(b.code == 0);
    const auto rows = read_metrics_csv(dir / "a/metrics.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].env_steps == 1024);
    CHECK(rows[1].env_steps == 2048);
    CHECK(strip_timing_columns(slurp(dir / "a/metrics.csv")) ==
          strip_timing_columns(slurp(dir / "b/metrics.csv")));
    CHECK(fs::exists(dir / "a/checkpoint.bin"));

    const CliResult other = cli(dir, "train --quiet --config '" + cfg + "' --seed 8 --out '" + (dir / "c") + "'");
    REQUIRE(other.code == 0);
    CHECK(strip_timing_columns(slurp(dir / "a/metrics.csv")) !=
          strip_timing_columns(slurp(dir / "c/metrics.csv")));

    const CliResult e1 = cli(dir, "eval --config '" + cfg + "' --checkpoint '" + (dir / "a/checkpoint.bin") + "' --episodes 4 --seed 11");
    REQUIRE(e1.code == 0);
    const CliResult e2 = cli(dir, "eval --config '" + cfg + "' --checkpoint '" + (dir / "a/checkpoint.bin") + "' --episodes 4 --seed 11");
    CHECK(e1.out == e2.out);
    CHECK(e1.out.find("mean_asr") != std::string::npos);

    // Checkpoint from a classical agent against a quantum config.
    ExperimentConfig q = c;
    q.agent.kind = "quantum";
    const std::string qcfg = write_config(dir, q, "q.json");
    CHECK(cli(dir, "eval --config '" + qcfg + "' --checkpoint '" + (dir / "a/checkpoint.bin") + "'").code == 4);
    spit(dir / "junk.bin", "not a checkpoint");
    CHECK(cli(dir, "eval --config '" + cfg + "' --checkpoint '" + (dir / "junk.bin") + "'").code == 3);
}

TEST_CASE("unwritable output directory exits with an I/O error") {
    TempDir dir;
    spit(dir / "blocker", "x");
    const std::string cfg = write_config(dir, tiny(), "cfg.json");
    const CliResult r = cli(dir, "train --quiet --config '" + cfg + "' --agent random --out '" + (dir / "blocker/sub") + "'");
    CHECK(r.code == 3);
}

TEST_CASE("evaluation of the random baseline") {
    ExperimentConfig c = tiny();
    c.agent.kind = "random";
    c.env.min_rate = 0.0;
    auto env = make_env_factory(c)();
    ppo::Agent agent(c.agent_spec(), env->state_dim(), env->action_dim(), c.ppo, 1);
    const ppo::EvalReport r = cmd_eval(c, agent, 10, 42);
    CHECK(r.mean_asr > 0.0);
    CHECK(r.qos_rate == 1.0);
    CHECK(r.mean_reward == Catch::Approx(r.mean_asr).epsilon(1e-12));
    CHECK(cmd_eval(c, agent, 10, 42).mean_asr == r.mean_asr);
    CHECK(cmd_eval(c, agent, 10, 43).mean_asr != r.mean_asr);

    const ppo::EvalReport one = cmd_eval(c, agent, 1, 42);
    CHECK(one.ci_degenerate);
    CHECK(format_report(one).find("degenerate") != std::string::npos);
    CHECK(format_report(r).find("degenerate") == std::string::npos);
}

TEST_CASE("sweep axes") {
    const ExperimentConfig c = tiny();
    CHECK(apply_axis(c, "N", 16).geometry.atoms_per_layer == 16);
    CHECK(apply_axis(c, "L", 4).geometry.num_layers == 4);
    CHECK(apply_axis(c, "P0", 20).env.max_power_dbm == 20);
    CHECK(apply_axis(c, "R_min", 0.3).env.min_rate == 0.3);
    const ExperimentConfig m = apply_axis(c, "M", 4);
    CHECK(m.geometry.num_users == 4);
    CHECK(m.geometry.num_antennas == 4);
    CHECK_NOTHROW(m.validate());
    const ExperimentConfig d = apply_axis(c, "distance", 90);
    CHECK(d.channel.min_distance == 90);
    CHECK(d.channel.max_distance == 90);
    CHECK_THROWS_AS(apply_axis(c, "L", 1.5), ConfigError);
    CHECK_THROWS_AS(apply_axis(c, "K", 2), ConfigError);
}

TEST_CASE("sweep over layers records every point") {
    TempDir dir;
    ExperimentConfig c = tiny();
    c.run.eval_episodes = 2;
    const auto rows = cmd_sweep(c, "L", {1, 2}, {"random", "classical"}, dir / "sw");
    REQUIRE(rows.size() == 4);
    for (const auto &r : rows) {
        CHECK(r.status == "ok");
        CHECK(r.report.episodes == 2);
    }
    const std::string csv = slurp(dir / "sw/sweep.csv");
    CHECK(csv.rfind(std::string(kSweepHeader) + "\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("a failing sweep point is recorded and the sweep continues") {
    TempDir dir;
    ExperimentConfig c = tiny();
    c.run.eval_episodes = 2;
    const auto rows = cmd_sweep(c, "N", {10, 4}, {"random"}, dir / "sw");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].status == "error");
    CHECK(rows[0].error.find("geometry.atoms_per_layer") != std::string::npos);
    CHECK(rows[1].status == "ok");

    const std::string cfg = write_config(dir, c, "cfg.json");
    CHECK(cli(dir, "sweep --quiet --config '" + cfg + "' --axis K --values 1,2 --agents random --out '" + (dir / "x") + "'").code == 2);
    CHECK(cli(dir, "sweep --quiet --config '" + cfg + "' --axis L --values 1,two --agents random --out '" + (dir / "x") + "'").code == 2);
    CHECK(cli(dir, "sweep --quiet --config '" + cfg + "' --axis L --values 1 --agents ddpg --out '" + (dir / "x") + "'").code == 2);
}

TEST_CASE("single-user secrecy rate grows with transmit power") {
    TempDir dir;
    ExperimentConfig c = tiny();
    c.geometry.num_users = 1;
    c.geometry.num_antennas = 1;
    c.env.min_rate = 0.0;
    c.run.eval_episodes = 10;
    const auto rows = cmd_sweep(c, "P0", {-10, 0, 10, 20, 30}, {"random"}, dir / "sw");
    REQUIRE(rows.size() == 5);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        REQUIRE(rows[i].status == "ok");
        CHECK(rows[i].report.mean_asr >= rows[i - 1].report.mean_asr);
    }
    CHECK(rows.back().report.mean_asr > rows.front().report.mean_asr);
}

TEST_CASE("moving average") {
    const std::vector<double> x{1, 5, 2, 8, 3};
    CHECK(moving_average(x, 1) == x);
    const auto c = moving_average(std::vector<double>(6, 2.5), 3);
    for (double v : c) {
        CHECK(v == 2.5);
    }
    const auto ramp = moving_average({0, 0, 0, 4, 4, 4, 4}, 4);
    CHECK(ramp == std::vector<double>{0, 0, 0, 1, 2, 3, 4});
    CHECK_THROWS_AS(moving_average(x, 0), InputDomainError);
}

TEST_CASE("plotdata joins runs on env_steps") {
    TempDir dir;
    const auto write = [&](const std::string &sub, std::vector<double> asr, long step) {
        std::vector<ppo::MetricsRow> rows;
        for (std::size_t i = 0; i < asr.size(); ++i) {
            ppo::MetricsRow r;
            r.iteration = static_cast<long>(i) + 1;
            r.env_steps = step * r.iteration;
            r.mean_asr = asr[i];
            rows.push_back(r);
        }
        fs::create_directories(dir / sub);
        write_metrics_csv(dir / (sub + "/metrics.csv"), rows);
        return dir / (sub + "/metrics.csv");
    };
    const std::string a = write("ppo", {0, 0, 6, 6}, 1024);
    const std::string b = write("qppo", {1, 1}, 2048);
    const std::string text = cmd_plotdata({a, b}, 2);
    CHECK(text == "env_steps,ppo,qppo\n"
                  "1024,0,\n"
                  "2048,0,1\n"
                  "3072,3,\n"
                  "4096,6,1\n");

    const CliResult ok = cli(dir, "plotdata '" + a + "' --window 1");
    CHECK(ok.code == 0);
    CHECK(ok.out == "env_steps,ppo\n1024,0\n2048,0\n3072,6\n4096,6\n");

    spit(dir / "old.csv", "iteration,env_steps,mean_asr\n1,1024,0.1\n");
    const CliResult bad = cli(dir, "plotdata '" + a + "' '" + (dir / "old.csv") + "'");
    CHECK(bad.code == 2);
    CHECK(bad.err.find("old.csv") != std::string::npos);
    CHECK(cli(dir, "plotdata '" + a + "' --window 0").code == 2);
}
