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
 * @file config.hpp
 * Experiment configuration: a JSON document with sections geometry, channel,
 * env, agent, ppo and run. Every key is required. Logarithmic quantities
 * (dBm, dB) are kept as written and converted to linear scale on access.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "channel.hpp"
#include "env.hpp"
#include "geometry.hpp"
#include "ppo.hpp"
#include "types.hpp"

namespace simqppo {

struct GeometryConfig {
    int num_layers = 3;
    int atoms_per_layer = 25;
    int num_antennas = 4;
    int num_users = 3;
    double wavelength = 10.7e-3;
    double atom_spacing = 0.5 * 10.7e-3;
    double total_thickness = 5.0 * 10.7e-3;
    double atom_area = 0.25 * 10.7e-3 * 10.7e-3;

    bool operator==(const GeometryConfig &) const = default;
};

struct ChannelConfig {
    double rician_factor_db = -30.0;
    double ref_path_loss_db = -35.0;
    double path_loss_exponent = 3.5;
    double user_noise_dbm = -104.0;
    double eve_noise_dbm = -104.0;
    double csi_uncertainty = 0.1;
    double bs_height = 10.0;
    double min_distance = 75.0;
    double max_distance = 100.0;

    bool operator==(const ChannelConfig &) const = default;
};

struct EnvSection {
    int horizon = 20;
    double max_power_dbm = 10.0;
    double min_rate = 0.0;

    bool operator==(const EnvSection &) const = default;
};

struct AgentConfig {
    std::string kind = "quantum";
    int qubits = 5;
    int pqc_layers = 4;
    double inverse_temperature = 1.0;
    std::vector<int> actor_hidden{1024, 1024, 1024, 1024};
    std::vector<int> critic_hidden{1024, 1024, 1024, 1024};
    int pre_conv_layers = 2;
    int pre_conv_filters = 128;
    int pre_conv_kernel = 3;
    int pre_conv_stride = 2;
    int pre_dense = 64;
    std::vector<int> post_hidden{62, 32};
    double log_std_init = 0.0;

    bool operator==(const AgentConfig &) const = default;
};

struct RunConfig {
    std::uint64_t seed = 0;
    long total_steps = 40'000;
    int eval_episodes = 10;
    std::uint64_t eval_seed = 1'000'000;
    int train_seeds = 5;
    std::string output_dir = "runs";

    bool operator==(const RunConfig &) const = default;
};

struct ExperimentConfig {
    GeometryConfig geometry;
    ChannelConfig channel;
    EnvSection env;
    AgentConfig agent;
    ppo::PpoHyper ppo;
    RunConfig run;

    bool operator==(const ExperimentConfig &o) const {
        const auto &a = ppo;
        const auto &b = o.ppo;
        return geometry == o.geometry && channel == o.channel && env == o.env &&
               agent == o.agent && run == o.run && a.gamma == b.gamma &&
               a.gae_lambda == b.gae_lambda && a.clip == b.clip && a.epochs == b.epochs &&
               a.minibatch == b.minibatch && a.batch_steps == b.batch_steps &&
               a.entropy_coeff == b.entropy_coeff && a.value_coeff == b.value_coeff &&
               a.lr == b.lr && a.max_grad_norm == b.max_grad_norm;
    }

    [[nodiscard]] SimGeometry sim_geometry() const {
        SimGeometry g;
        g.num_layers = geometry.num_layers;
        g.atoms_per_layer = geometry.atoms_per_layer;
        g.num_antennas = geometry.num_antennas;
        g.num_users = geometry.num_users;
        g.wavelength = geometry.wavelength;
        g.atom_spacing = geometry.atom_spacing;
        g.total_thickness = geometry.total_thickness;
        g.atom_area = geometry.atom_area;
        return g;
    }

    [[nodiscard]] ChannelParams channel_params() const {
        ChannelParams p;
        p.rician_factor = db_to_linear(channel.rician_factor_db);
        p.ref_path_loss = db_to_linear(channel.ref_path_loss_db);
        p.path_loss_exponent = channel.path_loss_exponent;
        p.noise_power_user = dbm_to_watts(channel.user_noise_dbm);
        p.noise_power_eve = dbm_to_watts(channel.eve_noise_dbm);
        p.csi_uncertainty = channel.csi_uncertainty;
        return p;
    }

    [[nodiscard]] EnvConfig env_config() const {
        EnvConfig e;
        e.horizon = env.horizon;
        e.max_power = dbm_to_watts(env.max_power_dbm);
        e.min_rate = env.min_rate;
        e.placement.min_distance = channel.min_distance;
        e.placement.max_distance = channel.max_distance;
        e.placement.bs_height = channel.bs_height;
        return e;
    }

    [[nodiscard]] ppo::AgentSpec agent_spec() const {
        ppo::AgentSpec s;
        s.kind = ppo::parse_agent_kind(agent.kind);
        s.qubits = agent.qubits;
        s.pqc_layers = agent.pqc_layers;
        s.inverse_temperature = agent.inverse_temperature;
        s.actor_hidden = agent.actor_hidden;
        s.critic_hidden = agent.critic_hidden;
        s.pre_conv_layers = agent.pre_conv_layers;
        s.pre_conv_filters = agent.pre_conv_filters;
        s.pre_conv_kernel = agent.pre_conv_kernel;
        s.pre_conv_stride = agent.pre_conv_stride;
        s.pre_dense = agent.pre_dense;
        s.post_hidden = agent.post_hidden;
        s.log_std_init = agent.log_std_init;
        return s;
    }

    [[nodiscard]] ppo::TrainOptions train_options() const {
        ppo::TrainOptions o;
        o.agent = agent_spec();
        o.hyper = ppo;
        o.total_steps = run.total_steps;
        o.seed = run.seed;
        return o;
    }

    /// Cross-field checks; throws ConfigError naming the offending key.
    void validate() const {
        const GeometryConfig &g = geometry;
        if (g.num_layers < 1) {
            throw ConfigError("geometry.num_layers", "must be >= 1");
        }
        const int root = static_cast<int>(std::lround(std::sqrt(std::max(g.atoms_per_layer, 0))));
        if (g.atoms_per_layer < 1 || root * root != g.atoms_per_layer) {
            throw ConfigError("geometry.atoms_per_layer", "must be a positive perfect square");
        }
        if (g.num_antennas < 1) {
            throw ConfigError("geometry.num_antennas", "must be >= 1");
        }
        if (g.num_users < 1) {
            throw ConfigError("geometry.num_users", "must be >= 1");
        }
        if (g.num_users > g.num_antennas) {
            throw ConfigError("geometry.num_users", "must not exceed geometry.num_antennas");
        }
        for (const auto &[name, v] : {std::pair{"wavelength", g.wavelength},
                                      std::pair{"atom_spacing", g.atom_spacing},
                                      std::pair{"total_thickness", g.total_thickness},
                                      std::pair{"atom_area", g.atom_area}}) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw ConfigError(std::string("geometry.") + name, "must be positive");
            }
        }
        const ChannelConfig &c = channel;
        if (!(c.path_loss_exponent > 0.0)) {
            throw ConfigError("channel.path_loss_exponent", "must be positive");
        }
        if (!(c.csi_uncertainty >= 0.0)) {
            throw ConfigError("channel.csi_uncertainty", "must be >= 0");
        }
        if (!(c.bs_height >= 0.0)) {
            throw ConfigError("channel.bs_height", "must be >= 0");
        }
        if (!(c.min_distance >= 0.0) || std::hypot(c.bs_height, c.min_distance) < 1.0) {
            throw ConfigError("channel.min_distance", "link distance must be at least 1 m");
        }
        if (!(c.max_distance >= c.min_distance)) {
            throw ConfigError("channel.max_distance", "must be >= channel.min_distance");
        }
        for (const auto &[name, v] :
             {std::pair{"rician_factor_db", c.rician_factor_db},
              std::pair{"ref_path_loss_db", c.ref_path_loss_db},
              std::pair{"user_noise_dbm", c.user_noise_dbm},
              std::pair{"eve_noise_dbm", c.eve_noise_dbm}}) {
            if (!std::isfinite(v)) {
                throw ConfigError(std::string("channel.") + name, "must be finite");
            }
        }
        if (env.horizon < 1) {
            throw ConfigError("env.horizon", "must be >= 1");
        }
        if (!std::isfinite(env.max_power_dbm)) {
            throw ConfigError("env.max_power_dbm", "must be finite");
        }
        if (!(env.min_rate >= 0.0)) {
            throw ConfigError("env.min_rate", "must be >= 0");
        }
        agent_spec().validate();
        ppo.validate();
        if (run.total_steps < ppo.batch_steps) {
            throw ConfigError("run.total_steps", "must be >= ppo.batch_steps");
        }
        if (run.eval_episodes < 1) {
            throw ConfigError("run.eval_episodes", "must be >= 1");
        }
        if (run.train_seeds < 1) {
            throw ConfigError("run.train_seeds", "must be >= 1");
        }
    }
};

namespace config_detail {

using nlohmann::json;

class Reader {
  public:
    Reader(const json &j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw ConfigError(path_.empty() ? "<root>" : path_, "must be an object");
        }
    }

    [[nodiscard]] Reader section(const std::string &key) {
        return Reader(at(key), full(key));
    }

    template <typename T> void get(const std::string &key, T &out) {
        const json &v = at(key);
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) {
                    throw ConfigError(full(key), "must be a number");
                }
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_integer()) {
                    throw ConfigError(full(key), "must be an integer");
                }
                if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() &&
                    v.get<long long>() < 0) {
                    throw ConfigError(full(key), "must be non-negative");
                }
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) {
                    throw ConfigError(full(key), "must be a string");
                }
            } else {
                if (!v.is_array()) {
                    throw ConfigError(full(key), "must be an array");
                }
                for (const json &e : v) {
                    if (!e.is_number_integer()) {
                        throw ConfigError(full(key), "must contain integers");
                    }
                }
            }
            out = v.get<T>();
        } catch (const json::exception &e) {
            throw ConfigError(full(key), e.what());
        }
    }

    /// Rejects keys that were never read.
    void finish() const {
        for (const auto &[k, v] : j_.items()) {
            if (!seen_.contains(k)) {
                throw ConfigError(full(k), "unknown key");
            }
        }
    }

  private:
    const json &at(const std::string &key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) {
            throw ConfigError(full(key), "missing required field");
        }
        return *it;
    }

    [[nodiscard]] std::string full(const std::string &key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    const json &j_;
    std::string path_;
    std::set<std::string> seen_;
};

} // namespace config_detail

inline nlohmann::json to_json(const ExperimentConfig &c) {
    nlohmann::json j;
    j["geometry"] = {{"num_layers", c.geometry.num_layers},
                     {"atoms_per_layer", c.geometry.atoms_per_layer},
                     {"num_antennas", c.geometry.num_antennas},
                     {"num_users", c.geometry.num_users},
                     {"wavelength", c.geometry.wavelength},
                     {"atom_spacing", c.geometry.atom_spacing},
                     {"total_thickness", c.geometry.total_thickness},
                     {"atom_area", c.geometry.atom_area}};
    j["channel"] = {{"rician_factor_db", c.channel.rician_factor_db},
                    {"ref_path_loss_db", c.channel.ref_path_loss_db},
                    {"path_loss_exponent", c.channel.path_loss_exponent},
                    {"user_noise_dbm", c.channel.user_noise_dbm},
                    {"eve_noise_dbm", c.channel.eve_noise_dbm},
                    {"csi_uncertainty", c.channel.csi_uncertainty},
                    {"bs_height", c.channel.bs_height},
                    {"min_distance", c.channel.min_distance},
                    {"max_distance", c.channel.max_distance}};
    j["env"] = {{"horizon", c.env.horizon},
                {"max_power_dbm", c.env.max_power_dbm},
                {"min_rate", c.env.min_rate}};
    j["agent"] = {{"kind", c.agent.kind},
                  {"qubits", c.agent.qubits},
                  {"pqc_layers", c.agent.pqc_layers},
                  {"inverse_temperature", c.agent.inverse_temperature},
                  {"actor_hidden", c.agent.actor_hidden},
                  {"critic_hidden", c.agent.critic_hidden},
                  {"pre_conv_layers", c.agent.pre_conv_layers},
                  {"pre_conv_filters", c.agent.pre_conv_filters},
                  {"pre_conv_kernel", c.agent.pre_conv_kernel},
                  {"pre_conv_stride", c.agent.pre_conv_stride},
                  {"pre_dense", c.agent.pre_dense},
                  {"post_hidden", c.agent.post_hidden},
                  {"log_std_init", c.agent.log_std_init}};
    j["ppo"] = {{"gamma", c.ppo.gamma},
                {"gae_lambda", c.ppo.gae_lambda},
                {"clip", c.ppo.clip},
                {"epochs", c.ppo.epochs},
                {"minibatch", c.ppo.minibatch},
                {"batch_steps", c.ppo.batch_steps},
                {"entropy_coeff", c.ppo.entropy_coeff},
                {"value_coeff", c.ppo.value_coeff},
                {"lr", c.ppo.lr},
                {"max_grad_norm", c.ppo.max_grad_norm}};
    j["run"] = {{"seed", c.run.seed},
                {"total_steps", c.run.total_steps},
                {"eval_episodes", c.run.eval_episodes},
                {"eval_seed", c.run.eval_seed},
                {"train_seeds", c.run.train_seeds},
                {"output_dir", c.run.output_dir}};
    return j;
}

/// Parses without cross-field validation; see ExperimentConfig::validate.
inline ExperimentConfig from_json(const nlohmann::json &j) {
    using config_detail::Reader;
    ExperimentConfig c;
    Reader root(j, "");
    {
        Reader r = root.section("geometry");
        r.get("num_layers", c.geometry.num_layers);
        r.get("atoms_per_layer", c.geometry.atoms_per_layer);
        r.get("num_antennas", c.geometry.num_antennas);
        r.get("num_users", c.geometry.num_users);
        r.get("wavelength", c.geometry.wavelength);
        r.get("atom_spacing", c.geometry.atom_spacing);
        r.get("total_thickness", c.geometry.total_thickness);
        r.get("atom_area", c.geometry.atom_area);
        r.finish();
    }
    {
        Reader r = root.section("channel");
        r.get("rician_factor_db", c.channel.rician_factor_db);
        r.get("ref_path_loss_db", c.channel.ref_path_loss_db);
        r.get("path_loss_exponent", c.channel.path_loss_exponent);
        r.get("user_noise_dbm", c.channel.user_noise_dbm);
        r.get("eve_noise_dbm", c.channel.eve_noise_dbm);
        r.get("csi_uncertainty", c.channel.csi_uncertainty);
        r.get("bs_height", c.channel.bs_height);
        r.get("min_distance", c.channel.min_distance);
        r.get("max_distance", c.channel.max_distance);
        r.finish();
    }
    {
        Reader r = root.section("env");
        r.get("horizon", c.env.horizon);
        r.get("max_power_dbm", c.env.max_power_dbm);
        r.get("min_rate", c.env.min_rate);
        r.finish();
    }
    {
        Reader r = root.section("agent");
        r.get("kind", c.agent.kind);
        r.get("qubits", c.agent.qubits);
        r.get("pqc_layers", c.agent.pqc_layers);
        r.get("inverse_temperature", c.agent.inverse_temperature);
        r.get("actor_hidden", c.agent.actor_hidden);
        r.get("critic_hidden", c.agent.critic_hidden);
        r.get("pre_conv_layers", c.agent.pre_conv_layers);
        r.get("pre_conv_filters", c.agent.pre_conv_filters);
        r.get("pre_conv_kernel", c.agent.pre_conv_kernel);
        r.get("pre_conv_stride", c.agent.pre_conv_stride);
        r.get("pre_dense", c.agent.pre_dense);
        r.get("post_hidden", c.agent.post_hidden);
        r.get("log_std_init", c.agent.log_std_init);
        r.finish();
    }
    {
        Reader r = root.section("ppo");
        r.get("gamma", c.ppo.gamma);
        r.get("gae_lambda", c.ppo.gae_lambda);
        r.get("clip", c.ppo.clip);
        r.get("epochs", c.ppo.epochs);
        r.get("minibatch", c.ppo.minibatch);
        r.get("batch_steps", c.ppo.batch_steps);
        r.get("entropy_coeff", c.ppo.entropy_coeff);
        r.get("value_coeff", c.ppo.value_coeff);
        r.get("lr", c.ppo.lr);
        r.get("max_grad_norm", c.ppo.max_grad_norm);
        r.finish();
    }
    {
        Reader r = root.section("run");
        r.get("seed", c.run.seed);
        r.get("total_steps", c.run.total_steps);
        r.get("eval_episodes", c.run.eval_episodes);
        r.get("eval_seed", c.run.eval_seed);
        r.get("train_seeds", c.run.train_seeds);
        r.get("output_dir", c.run.output_dir);
        r.finish();
    }
    root.finish();
    return c;
}

inline std::string serialize(const ExperimentConfig &c) { return to_json(c).dump(2) + "\n"; }

/// Parses and validates.
inline ExperimentConfig parse_config(const std::string &text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError("<document>", e.what());
    }
    ExperimentConfig c = from_json(j);
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::ios_base::failure("cannot open config '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace simqppo
