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
/**
 * @file experiment.hpp
 * Experiment driver behind the command-line tool: train, eval, sweep and
 * plotdata, plus the metrics and sweep CSV formats.
 */
#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "checkpoint.hpp"
#include "config.hpp"
#include "env.hpp"
#include "ppo.hpp"

namespace simqppo {

/// Input file does not follow the expected CSV layout.
class SchemaError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char *kMetricsVersionLine = "# simqppo metrics v1";
inline constexpr const char *kMetricsHeader =
    "iteration,env_steps,mean_asr,mean_reward,jain,qos_violation_rate,surrogate_loss,"
    "value_loss,entropy,clip_fraction,wall_seconds";

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        out.push_back(cur);
    }
    if (!s.empty() && s.back() == sep) {
        out.emplace_back();
    }
    return out;
}

inline std::string metrics_line(const ppo::MetricsRow &r) {
    std::string s = std::to_string(r.iteration) + "," + std::to_string(r.env_steps);
    for (double v : {r.mean_asr, r.mean_reward, r.jain, r.qos_violation_rate, r.surrogate_loss,
                     r.value_loss, r.entropy, r.clip_fraction, r.wall_seconds}) {
        s += "," + format_double(v);
    }
    return s;
}

inline void write_metrics_header(std::ostream &os) {
    os << kMetricsVersionLine << "\n" << kMetricsHeader << "\n";
}

inline std::vector<ppo::MetricsRow> parse_metrics_csv(std::istream &in, const std::string &name) {
    std::string line;
    if (!std::getline(in, line) || line != kMetricsVersionLine) {
        throw SchemaError(name + ": missing '" + kMetricsVersionLine + "' line");
    }
    if (!std::getline(in, line) || line != kMetricsHeader) {
        throw SchemaError(name + ": unexpected header");
    }
    std::vector<ppo::MetricsRow> rows;
    long lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 11) {
            throw SchemaError(name + ":" + std::to_string(lineno) + ": expected 11 fields");
        }
        try {
            std::size_t pos = 0;
            ppo::MetricsRow r;
            r.iteration = std::stol(f[0], &pos);
            r.env_steps = std::stol(f[1], &pos);
            double *dst[] = {&r.mean_asr,       &r.mean_reward, &r.jain,
                             &r.qos_violation_rate, &r.surrogate_loss, &r.value_loss,
                             &r.entropy,        &r.clip_fraction, &r.wall_seconds};
            for (std::size_t i = 0; i < 9; ++i) {
                *dst[i] = std::stod(f[i + 2], &pos);
                if (pos != f[i + 2].size()) {
                    throw std::invalid_argument("trailing characters");
                }
            }
            rows.push_back(r);
        } catch (const std::logic_error &) {
            throw SchemaError(name + ":" + std::to_string(lineno) + ": malformed number");
        }
    }
    return rows;
}

inline std::vector<ppo::MetricsRow> read_metrics_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::ios_base::failure("cannot open '" + path + "'");
    }
    return parse_metrics_csv(in, path);
}

inline void write_metrics_csv(const std::string &path, const std::vector<ppo::MetricsRow> &rows) {
    std::ofstream out(path);
    if (!out) {
        throw std::ios_base::failure("cannot write '" + path + "'");
    }
    write_metrics_header(out);
    for (const auto &r : rows) {
        out << metrics_line(r) << "\n";
    }
    if (!out) {
        throw std::ios_base::failure("write failed for '" + path + "'");
    }
}

/// Drops the last column (wall_seconds) of every data line.
inline std::string strip_timing_columns(const std::string &csv) {
    std::istringstream in(csv);
    std::string line;
    std::string out;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#') {
            const auto cut = line.rfind(',');
            if (cut != std::string::npos) {
                line.resize(cut);
            }
        }
        out += line + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Commands

inline ppo::EnvFactory make_env_factory(const ExperimentConfig &cfg) {
    const SimGeometry geom = cfg.sim_geometry();
    const ChannelParams params = cfg.channel_params();
    const EnvConfig env = cfg.env_config();
    return [=] { return std::make_unique<SecrecyEnv>(geom, params, env); };
}

struct TrainSummary {
    std::vector<ppo::MetricsRow> metrics;
    std::string metrics_path;
    std::string checkpoint_path;
    std::unique_ptr<ppo::Agent> agent;
};

inline Checkpoint agent_checkpoint(const ppo::Agent &agent, const ExperimentConfig &cfg) {
    Checkpoint ck = agent.to_checkpoint();
    ck.set_meta("config", serialize(cfg));
    return ck;
}

/// Runs training and writes metrics.csv (streamed) and checkpoint.bin into
/// out_dir. `log` receives one line per iteration when non-null.
inline TrainSummary cmd_train(const ExperimentConfig &cfg, const std::string &out_dir,
                              std::ostream *log = nullptr) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);
    TrainSummary s;
    s.metrics_path = (std::filesystem::path(out_dir) / "metrics.csv").string();
    s.checkpoint_path = (std::filesystem::path(out_dir) / "checkpoint.bin").string();
    std::ofstream metrics(s.metrics_path);
    if (!metrics) {
        throw std::ios_base::failure("cannot write '" + s.metrics_path + "'");
    }
    write_metrics_header(metrics);
    ppo::TrainResult result =
        ppo::train(make_env_factory(cfg), cfg.train_options(), [&](const ppo::MetricsRow &r) {
            metrics << metrics_line(r) << "\n" << std::flush;
            if (log != nullptr) {
                *log << "iter " << r.iteration << " steps " << r.env_steps << " asr "
                     << r.mean_asr << " reward " << r.mean_reward << " jain " << r.jain
                     << " clip " << r.clip_fraction << "\n";
            }
        });
    if (!metrics) {
        throw std::ios_base::failure("write failed for '" + s.metrics_path + "'");
    }
    agent_checkpoint(*result.agent, cfg).save(s.checkpoint_path);
    s.metrics = std::move(result.metrics);
    s.agent = std::move(result.agent);
    return s;
}

/// Rebuilds the agent described by `cfg` and loads `ck` into it.
inline std::unique_ptr<ppo::Agent> restore_agent(const ExperimentConfig &cfg, const Checkpoint &ck) {
    auto env = make_env_factory(cfg)();
    auto agent = std::make_unique<ppo::Agent>(cfg.agent_spec(), env->state_dim(),
                                              env->action_dim(), cfg.ppo, cfg.run.seed);
    agent->load(ck);
    return agent;
}

inline ppo::EvalReport cmd_eval(const ExperimentConfig &cfg, const ppo::Agent &agent, int episodes,
                                std::uint64_t eval_seed) {
    auto env = make_env_factory(cfg)();
    return ppo::evaluate_policy(agent, *env, episodes, eval_seed);
}

inline ppo::EvalReport cmd_eval(const ExperimentConfig &cfg, const std::string &checkpoint_path,
                                int episodes, std::uint64_t eval_seed) {
    cfg.validate();
    const Checkpoint ck = Checkpoint::load(checkpoint_path);
    const auto agent = restore_agent(cfg, ck);
    return cmd_eval(cfg, *agent, episodes, eval_seed);
}

inline std::string format_report(const ppo::EvalReport &r) {
    std::ostringstream os;
    os << "episodes " << r.episodes << "\n"
       << "mean_asr " << format_double(r.mean_asr) << " +- " << format_double(r.asr_ci95) << "\n"
       << "jain " << format_double(r.mean_jain) << " +- " << format_double(r.jain_ci95) << "\n"
       << "qos_rate " << format_double(r.qos_rate) << "\n"
       << "mean_reward " << format_double(r.mean_reward) << "\n";
    if (r.ci_degenerate) {
        os << "note: confidence interval degenerate (fewer than 2 episodes)\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Sweeps

inline const std::vector<std::string> &sweep_axes() {
    static const std::vector<std::string> axes{"N", "L", "P0", "R_min", "M", "distance"};
    return axes;
}

inline bool is_sweep_axis(const std::string &axis) {
    const auto &a = sweep_axes();
    return std::find(a.begin(), a.end(), axis) != a.end();
}

/// Copy of `base` with one axis set. P0 is in dBm; distance fixes every
/// node's horizontal distance; M raises K to at least M.
inline ExperimentConfig apply_axis(ExperimentConfig cfg, const std::string &axis, double value) {
    const auto as_int = [&](const std::string &field) {
        const double r = std::round(value);
        if (r != value || r < 1) {
            throw ConfigError(field, "sweep value must be a positive integer");
        }
        return static_cast<int>(r);
    };
    if (axis == "N") {
        cfg.geometry.atoms_per_layer = as_int("geometry.atoms_per_layer");
    } else if (axis == "L") {
        cfg.geometry.num_layers = as_int("geometry.num_layers");
    } else if (axis == "P0") {
        cfg.env.max_power_dbm = value;
    } else if (axis == "R_min") {
        cfg.env.min_rate = value;
    } else if (axis == "M") {
        cfg.geometry.num_users = as_int("geometry.num_users");
        cfg.geometry.num_antennas = std::max(cfg.geometry.num_antennas, cfg.geometry.num_users);
    } else if (axis == "distance") {
        cfg.channel.min_distance = value;
        cfg.channel.max_distance = value;
    } else {
        throw ConfigError("axis", "unknown sweep axis '" + axis + "'");
    }
    return cfg;
}

struct SweepRow {
    std::string axis;
    double value = 0.0;
    std::string agent;
    std::uint64_t seed = 0;
    std::string status = "ok";
    ppo::EvalReport report;
    std::string error;
};

inline constexpr const char *kSweepHeader =
    "axis,value,agent,seed,status,mean_asr,asr_ci95,jain,jain_ci95,qos_rate,error";

inline std::string sweep_line(const SweepRow &r) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    return r.axis + "," + format_double(r.value) + "," + r.agent + "," + std::to_string(r.seed) +
           "," + r.status + "," + format_double(r.report.mean_asr) + "," +
           format_double(r.report.asr_ci95) + "," + format_double(r.report.mean_jain) + "," +
           format_double(r.report.jain_ci95) + "," + format_double(r.report.qos_rate) + "," + err;
}

/// Trains and evaluates every (value, agent) pair; a failing point is
/// recorded with status "error" and the sweep moves on.
inline std::vector<SweepRow> cmd_sweep(const ExperimentConfig &base, const std::string &axis,
                                       const std::vector<double> &values,
                                       const std::vector<std::string> &agents,
                                       const std::string &out_dir, std::ostream *log = nullptr) {
    if (!is_sweep_axis(axis)) {
        throw ConfigError("axis", "unknown sweep axis '" + axis + "'");
    }
    for (const auto &a : agents) {
        (void)ppo::parse_agent_kind(a);
    }
    std::filesystem::create_directories(out_dir);
    const std::string path = (std::filesystem::path(out_dir) / "sweep.csv").string();
    std::ofstream out(path);
    if (!out) {
        throw std::ios_base::failure("cannot write '" + path + "'");
    }
    out << kSweepHeader << "\n";
    std::vector<SweepRow> rows;
    for (double v : values) {
        for (const auto &kind : agents) {
            SweepRow row;
            row.axis = axis;
            row.value = v;
            row.agent = kind;
            row.seed = base.run.seed;
            try {
                ExperimentConfig cfg = apply_axis(base, axis, v);
                cfg.agent.kind = kind;
                cfg.validate();
                ppo::TrainResult tr = ppo::train(make_env_factory(cfg), cfg.train_options());
                row.report = cmd_eval(cfg, *tr.agent, cfg.run.eval_episodes, cfg.run.eval_seed);
            } catch (const std::exception &e) {
                row.status = "error";
                row.error = e.what();
            }
            if (log != nullptr) {
                *log << axis << "=" << v << " " << kind << " " << row.status << " asr "
                     << row.report.mean_asr << (row.error.empty() ? "" : " " + row.error) << "\n";
            }
            out << sweep_line(row) << "\n" << std::flush;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Plot data

/// Trailing mean over the last `window` samples; early entries use what exists.
inline std::vector<double> moving_average(const std::vector<double> &x, int window) {
    if (window < 1) {
        throw InputDomainError("window must be >= 1");
    }
    std::vector<double> out(x.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sum += x[i];
        if (i >= static_cast<std::size_t>(window)) {
            sum -= x[i - static_cast<std::size_t>(window)];
        }
        const std::size_t n = std::min<std::size_t>(i + 1, static_cast<std::size_t>(window));
        out[i] = sum / static_cast<double>(n);
    }
    return out;
}

/// One env_steps column followed by one smoothed mean_asr column per input,
/// joined on env_steps (blank where a series has no sample).
inline std::string cmd_plotdata(const std::vector<std::string> &paths, int window) {
    if (paths.empty()) {
        throw InputDomainError("plotdata needs at least one metrics file");
    }
    std::map<long, std::vector<std::optional<double>>> table;
    for (std::size_t k = 0; k < paths.size(); ++k) {
        const auto rows = read_metrics_csv(paths[k]);
        std::vector<double> asr;
        for (const auto &r : rows) {
            asr.push_back(r.mean_asr);
        }
        const auto smooth = moving_average(asr, window);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            auto &cells = table[rows[i].env_steps];
            cells.resize(paths.size());
            cells[k] = smooth[i];
        }
    }
    std::ostringstream os;
    os << "env_steps";
    for (const auto &p : paths) {
        std::string name = std::filesystem::path(p).parent_path().filename().string();
        if (name.empty()) {
            name = std::filesystem::path(p).stem().string();
        }
        std::replace(name.begin(), name.end(), ',', '_');
        os << "," << name;
    }
    os << "\n";
    for (auto &[steps, cells] : table) {
        cells.resize(paths.size());
        os << steps;
        for (const auto &c : cells) {
            os << ",";
            if (c) {
                os << format_double(*c);
            }
        }
        os << "\n";
    }
    return os.str();
}

} // namespace simqppo
