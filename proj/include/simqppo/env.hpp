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
 * @file env.hpp
 * Episodic environments. `SecrecyEnv` wraps the SIM downlink: the observation
 * is the legitimate CSI plus the eavesdropper estimate, the action is a raw
 * vector decoded into a power split and per-layer phases, and the reward is
 * the average secrecy rate gated by the per-user rate target.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include "channel.hpp"
#include "geometry.hpp"
#include "secrecy.hpp"
#include "types.hpp"

namespace simqppo {

/// What the trainer sees after one interaction.
struct Transition {
    RVector observation;
    double reward = 0.0;
    bool done = false;
    double asr = 0.0;
    double jain = 1.0;
    bool qos_ok = true;
};

class Environment {
  public:
    virtual ~Environment() = default;
    [[nodiscard]] virtual int state_dim() const = 0;
    [[nodiscard]] virtual int action_dim() const = 0;
    virtual RVector begin_episode(std::uint64_t seed) = 0;
    virtual Transition advance(std::span<const double> action) = 0;

    /// Raw action for the random baseline; standard normal unless overridden.
    virtual RVector random_action(Rng &rng) const {
        std::normal_distribution<double> gauss(0.0, 1.0);
        RVector a(action_dim());
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            a(i) = gauss(rng);
        }
        return a;
    }
};

struct EnvConfig {
    int horizon = 20;
    double max_power = 0.01; // W
    double min_rate = 0.0;   // bits/s/Hz
    PlacementRange placement;
};

struct EnvState {
    ChannelRealization raw_channels;
    RVector encoded;
};

struct DecodedAction {
    RVector power;
    PhaseConfiguration phases;
};

struct StepOutcome {
    EnvState next_state;
    double reward = 0.0;
    bool done = false;
    SecrecyReport info;
};

inline constexpr double kPowerLogitClip = 20.0;

/// raw = [power logits (M) | phases layer-major (L*N)].
inline DecodedAction decode_action(std::span<const double> raw, int users, int atoms, int layers,
                                   double max_power) {
    const auto expected = static_cast<std::size_t>(users + atoms * layers);
    if (raw.size() != expected) {
        throw StructuralError("action length " + std::to_string(raw.size()) + ", expected " +
                              std::to_string(expected));
    }
    for (double v : raw) {
        if (std::isnan(v)) {
            throw InputDomainError("action contains NaN");
        }
    }
    DecodedAction out;
    RVector q(users);
    for (int m = 0; m < users; ++m) {
        q(m) = std::exp(std::clamp(raw[static_cast<std::size_t>(m)], -kPowerLogitClip,
                                   kPowerLogitClip));
    }
    out.power = max_power * q / q.sum();
    RMatrix theta(layers, atoms);
    for (int l = 0; l < layers; ++l) {
        for (int n = 0; n < atoms; ++n) {
            const double r = raw[static_cast<std::size_t>(users + l * atoms + n)];
            theta(l, n) = wrap_phase((std::tanh(r) + 1.0) * kPi);
        }
    }
    out.phases = PhaseConfiguration(std::move(theta));
    return out;
}

/// Interleaved (re, im) per atom for every user channel, then the eavesdropper
/// estimate, each multiplied by `scale`.
inline RVector encode_state(const ChannelRealization &ch, double scale) {
    const auto n = ch.h_eve_est.size();
    const auto receivers = static_cast<Eigen::Index>(ch.h_users.size()) + 1;
    RVector out(2 * n * receivers);
    const auto put = [&](Eigen::Index r, const CVector &h) {
        for (Eigen::Index i = 0; i < n; ++i) {
            out(2 * (r * n + i)) = scale * h(i).real();
            out(2 * (r * n + i) + 1) = scale * h(i).imag();
        }
    };
    for (Eigen::Index r = 0; r + 1 < receivers; ++r) {
        put(r, ch.h_users[static_cast<std::size_t>(r)]);
    }
    put(receivers - 1, ch.h_eve_est);
    return out;
}

class SecrecyEnv final : public Environment {
  public:
    SecrecyEnv(SimGeometry geom, ChannelParams params, EnvConfig cfg)
        : geom_(geom), params_(params), cfg_(cfg), props_(build_propagation_matrices(geom_)),
          corr_(geom_) {
        geom_.validate();
        params_.validate();
        if (cfg_.horizon < 1) {
            throw InputDomainError("horizon must be positive");
        }
        if (!(cfg_.max_power > 0.0)) {
            throw InputDomainError("max_power must be positive");
        }
        if (!(cfg_.placement.min_distance <= cfg_.placement.max_distance) ||
            std::hypot(cfg_.placement.bs_height, cfg_.placement.min_distance) < 1.0) {
            throw InputDomainError("placement range invalid");
        }
        const double nearest = std::hypot(cfg_.placement.bs_height, cfg_.placement.min_distance);
        scale_ = 1.0 / std::sqrt(path_loss(nearest, params_));
    }

    [[nodiscard]] int state_dim() const override {
        return 2 * geom_.atoms_per_layer * (geom_.num_users + 1);
    }
    [[nodiscard]] int action_dim() const override {
        return geom_.num_users + geom_.atoms_per_layer * geom_.num_layers;
    }

    /// Samples fresh placements and fading. Deterministic per seed.
    EnvState reset(std::uint64_t seed) {
        rng_.seed(seed);
        state_.raw_channels = sample_realization(geom_, params_, corr_, cfg_.placement, rng_);
        state_.encoded = encode_state(state_.raw_channels, scale_);
        steps_ = 0;
        started_ = true;
        return state_;
    }

    [[nodiscard]] DecodedAction decode(std::span<const double> raw) const {
        return decode_action(raw, geom_.num_users, geom_.atoms_per_layer, geom_.num_layers,
                             cfg_.max_power);
    }

    /// Channels stay fixed within an episode.
    StepOutcome step(std::span<const double> raw) {
        if (!started_ || steps_ >= cfg_.horizon) {
            throw std::logic_error("step() called without an active episode");
        }
        const DecodedAction act = decode(raw);
        StepOutcome out;
        out.info = evaluate(state_.raw_channels, act.phases, act.power, props_, params_,
                            cfg_.min_rate);
        out.reward = out.info.qos_ok ? out.info.asr : 0.0;
        ++steps_;
        out.done = steps_ >= cfg_.horizon;
        out.next_state = state_;
        return out;
    }

    RVector begin_episode(std::uint64_t seed) override { return reset(seed).encoded; }

    /// Standard-normal power logits and phases uniform on [0, 2pi) after
    /// decoding.
    RVector random_action(Rng &rng) const override {
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> u(1e-12, 1.0 - 1e-12);
        RVector a(action_dim());
        for (int m = 0; m < geom_.num_users; ++m) {
            a(m) = gauss(rng);
        }
        for (Eigen::Index i = geom_.num_users; i < a.size(); ++i) {
            a(i) = std::atanh(2.0 * u(rng) - 1.0);
        }
        return a;
    }

    Transition advance(std::span<const double> action) override {
        StepOutcome s = step(action);
        Transition t;
        t.observation = std::move(s.next_state.encoded);
        t.reward = s.reward;
        t.done = s.done;
        t.asr = s.info.asr;
        t.jain = s.info.jain;
        t.qos_ok = s.info.qos_ok;
        return t;
    }

    [[nodiscard]] const EnvState &state() const { return state_; }
    [[nodiscard]] double state_scale() const { return scale_; }
    [[nodiscard]] const SimGeometry &geometry() const { return geom_; }
    [[nodiscard]] const ChannelParams &channel_params() const { return params_; }
    [[nodiscard]] const EnvConfig &config() const { return cfg_; }
    [[nodiscard]] const PropagationMatrices &propagation() const { return props_; }
    [[nodiscard]] int steps_taken() const { return steps_; }

  private:
    SimGeometry geom_;
    ChannelParams params_;
    EnvConfig cfg_;
    PropagationMatrices props_;
    CorrelationFactor corr_;
    Rng rng_;
    EnvState state_;
    double scale_ = 1.0;
    int steps_ = 0;
    bool started_ = false;
};

/// One-dimensional sanity task: constant observation, reward -|a - target|.
class TargetBanditEnv final : public Environment {
  public:
    explicit TargetBanditEnv(double target = 0.5, int horizon = 1)
        : target_(target), horizon_(horizon) {}

    [[nodiscard]] int state_dim() const override { return 1; }
    [[nodiscard]] int action_dim() const override { return 1; }

    RVector begin_episode(std::uint64_t) override {
        steps_ = 0;
        return RVector::Zero(1);
    }

    Transition advance(std::span<const double> action) override {
        if (action.size() != 1) {
            throw StructuralError("bandit action must be scalar");
        }
        Transition t;
        t.observation = RVector::Zero(1);
        t.reward = -std::abs(action[0] - target_);
        t.asr = t.reward;
        t.done = ++steps_ >= horizon_;
        return t;
    }

  private:
    double target_;
    int horizon_;
    int steps_ = 0;
};

} // namespace simqppo
