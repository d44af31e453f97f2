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
// Command-line driver: train, eval, sweep, plotdata.
//
// Exit codes: 0 success, 1 unexpected failure, 2 invalid configuration or
// arguments, 3 I/O error, 4 structural mismatch (e.g. checkpoint vs config).

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "simqppo/experiment.hpp"

namespace {

enum Exit { kOk = 0, kFailure = 1, kInvalid = 2, kIo = 3, kStructural = 4 };

std::vector<double> parse_values(const std::string &text) {
    std::vector<double> out;
    for (const auto &tok : simqppo::split(text, ',')) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &pos);
        } catch (const std::logic_error &) {
            pos = 0;
        }
        if (tok.empty() || pos != tok.size()) {
            throw simqppo::ConfigError("values", "cannot parse '" + tok + "' as a number");
        }
        out.push_back(v);
    }
    if (out.empty()) {
        throw simqppo::ConfigError("values", "empty list");
    }
    return out;
}

simqppo::ExperimentConfig load(const std::string &path, std::optional<std::uint64_t> seed) {
    simqppo::ExperimentConfig cfg = simqppo::load_config(path);
    if (seed) {
        cfg.run.seed = *seed;
    }
    return cfg;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"SIM-assisted secure downlink: PPO / Q-PPO training and evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string agent_override;
    bool quiet = false;

    auto *train = app.add_subcommand("train", "train one agent, write metrics.csv and checkpoint.bin");
    train->add_option("--config", config_path, "experiment config (JSON)")->required();
    train->add_option("--seed", seed, "override run.seed");
    train->add_option("--out", out_dir, "output directory (default run.output_dir)");
    train->add_option("--agent", agent_override, "override agent.kind");
    train->add_flag("--quiet", quiet, "suppress per-iteration log");

    std::string checkpoint_path;
    int episodes = 0;
    auto *eval = app.add_subcommand("eval", "deterministic-policy evaluation of a checkpoint");
    eval->add_option("--config", config_path, "experiment config (JSON)")->required();
    eval->add_option("--checkpoint", checkpoint_path, "checkpoint.bin from train")->required();
    eval->add_option("--episodes", episodes, "evaluation episodes (default run.eval_episodes)");
    eval->add_option("--seed", seed, "override run.eval_seed");

    std::string axis;
    std::string values_text;
    std::string agents_text = "classical,quantum,random";
    auto *sweep = app.add_subcommand("sweep", "train and evaluate along one parameter axis");
    sweep->add_option("--config", config_path, "base experiment config (JSON)")->required();
    sweep->add_option("--axis", axis, "N, L, P0, R_min, M or distance")->required();
    sweep->add_option("--values", values_text, "comma-separated values")->required();
    sweep->add_option("--agents", agents_text, "comma-separated agent kinds");
    sweep->add_option("--seed", seed, "override run.seed");
    sweep->add_option("--out", out_dir, "output directory (default run.output_dir)");
    sweep->add_flag("--quiet", quiet, "suppress per-point log");

    std::vector<std::string> csv_paths;
    int window = 10;
    std::string plot_out;
    auto *plot = app.add_subcommand("plotdata", "smoothed learning curves from metrics.csv files");
    plot->add_option("csv", csv_paths, "metrics.csv files")->required();
    plot->add_option("--window", window, "moving-average window");
    plot->add_option("--out", plot_out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalid;
    }

    try {
        if (train->parsed()) {
            simqppo::ExperimentConfig cfg = load(config_path, seed);
            if (!agent_override.empty()) {
                cfg.agent.kind = agent_override;
            }
            const std::string dir = out_dir.empty() ? cfg.run.output_dir : out_dir;
            const auto s = simqppo::cmd_train(cfg, dir, quiet ? nullptr : &std::cerr);
            const auto &last = s.metrics.back();
            std::cout << "trained " << cfg.agent.kind << " seed " << cfg.run.seed << ": "
                      << s.metrics.size() << " iterations, " << last.env_steps
                      << " steps, final mean_asr " << last.mean_asr << ", metrics "
                      << s.metrics_path << ", checkpoint " << s.checkpoint_path << "\n";
        } else if (eval->parsed()) {
            simqppo::ExperimentConfig cfg = simqppo::load_config(config_path);
            const int n = episodes > 0 ? episodes : cfg.run.eval_episodes;
            const std::uint64_t es = seed ? *seed : cfg.run.eval_seed;
            std::cout << simqppo::format_report(simqppo::cmd_eval(cfg, checkpoint_path, n, es));
        } else if (sweep->parsed()) {
            if (!simqppo::is_sweep_axis(axis)) {
                throw simqppo::ConfigError("axis", "unknown sweep axis '" + axis +
                                                       "' (expected N, L, P0, R_min, M, distance)");
            }
            const auto values = parse_values(values_text);
            const simqppo::ExperimentConfig cfg = load(config_path, seed);
            const std::string dir = out_dir.empty() ? cfg.run.output_dir : out_dir;
            const auto rows = simqppo::cmd_sweep(cfg, axis, values, simqppo::split(agents_text, ','),
                                                 dir, quiet ? nullptr : &std::cerr);
            int failed = 0;
            for (const auto &r : rows) {
                failed += r.status == "ok" ? 0 : 1;
            }
            std::cout << "sweep " << axis << ": " << rows.size() << " rows (" << failed
                      << " failed) written to " << dir << "/sweep.csv\n";
        } else if (plot->parsed()) {
            const std::string text = simqppo::cmd_plotdata(csv_paths, window);
            if (plot_out.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(plot_out);
                if (!(out << text)) {
                    throw std::ios_base::failure("cannot write '" + plot_out + "'");
                }
            }
        }
    } catch (const simqppo::ConfigError &e) {
        std::cerr << "error: invalid configuration: " << e.what() << "\n";
        return kInvalid;
    } catch (const simqppo::SchemaError &e) {
        std::cerr << "error: schema mismatch: " << e.what() << "\n";
        return kInvalid;
    } catch (const simqppo::InputDomainError &e) {
        std::cerr << "error: invalid argument: " << e.what() << "\n";
        return kInvalid;
    } catch (const simqppo::CheckpointError &e) {
        std::cerr << "error: checkpoint: " << e.what() << "\n";
        return kIo;
    } catch (const std::ios_base::failure &e) {
        std::cerr << "error: I/O: " << e.what() << "\n";
        return kIo;
    } catch (const std::filesystem::filesystem_error &e) {
        std::cerr << "error: I/O: " << e.what() << "\n";
        return kIo;
    } catch (const simqppo::StructuralError &e) {
        std::cerr << "error: mismatch: " << e.what() << "\n";
        return kStructural;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kOk;
}
