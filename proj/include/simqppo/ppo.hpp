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
 * @file ppo.hpp
 * Proximal policy optimization: rollout storage, generalized advantage
 * estimation, the clipped surrogate with value and entropy terms, Gaussian
 * policies over raw actions, and three actors (dense network, hybrid
 * pre-network -> circuit -> post-network, and a uniform random baseline).
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "checkpoint.hpp"
#include "env.hpp"
#include "neural.hpp"
#include "quantum.hpp"
#include "types.hpp"

namespace simqppo::ppo {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;
inline const double kHalfLog2Pi = 0.5 * std::log(2.0 * kPi);

struct PpoHyper {
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip = 0.2;
    int epochs = 10;
    int minibatch = 64;
    int batch_steps = 1024;
    double entropy_coeff = 0.01;
    double value_coeff = 0.5;
    double lr = 3e-4;
    double max_grad_norm = 0.5;

    void validate() const {
        if (!(gamma >= 0.0 && gamma <= 1.0)) {
            throw ConfigError("ppo.gamma", "must lie in [0, 1]");
        }
        if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) {
            throw ConfigError("ppo.gae_lambda", "must lie in [0, 1]");
        }
        if (!(clip > 0.0)) {
            throw ConfigError("ppo.clip", "must be positive");
        }
        if (epochs < 1) {
            throw ConfigError("ppo.epochs", "must be >= 1");
        }
        if (minibatch < 1) {
            throw ConfigError("ppo.minibatch", "must be >= 1");
        }
        if (batch_steps < minibatch) {
            throw ConfigError("ppo.batch_steps", "must be >= ppo.minibatch");
        }
        if (!(lr > 0.0)) {
            throw ConfigError("ppo.lr", "must be positive");
        }
        if (!(max_grad_norm > 0.0)) {
            throw ConfigError("ppo.max_grad_norm", "must be positive");
        }
    }
};

enum class AgentKind { classical, quantum, random };

inline std::string to_string(AgentKind k) {
    switch (k) {
    case AgentKind::classical:
        return "classical";
    case AgentKind::quantum:
        return "quantum";
    case AgentKind::random:
        return "random";
    }
    return "?";
}

inline AgentKind parse_agent_kind(const std::string &s) {
    if (s == "classical") {
        return AgentKind::classical;
    }
    if (s == "quantum") {
        return AgentKind::quantum;
    }
    if (s == "random") {
        return AgentKind::random;
    }
    throw ConfigError("agent.kind", "unknown agent kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// Advantage estimation

struct RolloutBuffer {
    RMatrix states;  // state_dim x T
    RMatrix actions; // action_dim x T
    RVector log_probs;
    RVector rewards;
    RVector values;
    std::vector<std::uint8_t> dones;
    double bootstrap_value = 0.0;
    RVector advantages;
    RVector returns;
    bool has_advantages = false;

    RolloutBuffer(int state_dim, int action_dim, int capacity)
        : states(state_dim, capacity), actions(action_dim, capacity), log_probs(capacity),
          rewards(capacity), values(capacity), dones(static_cast<std::size_t>(capacity), 0) {}

    [[nodiscard]] int size() const { return size_; }
    [[nodiscard]] int capacity() const { return static_cast<int>(rewards.size()); }
    [[nodiscard]] bool full() const { return size_ == capacity(); }

    void add(const RVector &s, const RVector &a, double log_prob, double reward, double value,
             bool done) {
        if (full()) {
            throw std::logic_error("rollout buffer is full");
        }
        states.col(size_) = s;
        actions.col(size_) = a;
        log_probs(size_) = log_prob;
        rewards(size_) = reward;
        values(size_) = value;
        dones[static_cast<std::size_t>(size_)] = done ? 1 : 0;
        ++size_;
        has_advantages = false;
    }

    void clear() {
        size_ = 0;
        has_advantages = false;
    }

  private:
    int size_ = 0;
};

struct GaeResult {
    RVector advantages;
    RVector returns;
};

/// Backward recursion A_t = delta_t + gamma*lambda*(1-done_t)*A_{t+1}, where
/// done_t cuts the bootstrap from V(s_{t+1}). `last_value` is V(s_T).
inline GaeResult compute_gae(const RVector &rewards, const RVector &values,
                             const std::vector<std::uint8_t> &dones, double last_value,
                             double gamma, double lambda) {
    const Eigen::Index n = rewards.size();
    if (values.size() != n || static_cast<Eigen::Index>(dones.size()) != n) {
        throw StructuralError("rewards, values and dones differ in length");
    }
    GaeResult out;
    out.advantages.resize(n);
    double carry = 0.0;
    for (Eigen::Index t = n - 1; t >= 0; --t) {
        const double live = dones[static_cast<std::size_t>(t)] != 0 ? 0.0 : 1.0;
        const double next_v = t + 1 < n ? values(t + 1) : last_value;
        const double delta = rewards(t) + gamma * next_v * live - values(t);
        carry = delta + gamma * lambda * live * carry;
        out.advantages(t) = carry;
    }
    out.returns = out.advantages + values;
    return out;
}

inline void compute_gae(RolloutBuffer &buf, double gamma, double lambda) {
    const int n = buf.size();
    const std::vector<std::uint8_t> dones(buf.dones.begin(), buf.dones.begin() + n);
    GaeResult r = compute_gae(buf.rewards.head(n), buf.values.head(n), dones, buf.bootstrap_value,
                              gamma, lambda);
    buf.advantages = std::move(r.advantages);
    buf.returns = std::move(r.returns);
    buf.has_advantages = true;
}

inline double clip_ratio(double ratio, double eps) {
    if (!(eps > 0.0)) {
        throw InputDomainError("clip epsilon must be positive");
    }
    if (ratio > 1.0 + eps) {
        return 1.0 + eps;
    }
    if (ratio < 1.0 - eps) {
        return 1.0 - eps;
    }
    return ratio;
}

/// Zero mean, unit standard deviation (population), guarded by 1e-8.
inline RVector normalize_advantages(const RVector &adv) {
    if (adv.size() == 0) {
        return adv;
    }
    const double mean = adv.mean();
    const double var = (adv.array() - mean).square().mean();
    return ((adv.array() - mean) / (std::sqrt(var) + 1e-8)).matrix();
}

// ---------------------------------------------------------------------------
// Gaussian policy

struct GaussianPolicyOutput {
    RVector mean;
    RVector log_std;
};

inline double gaussian_log_prob(const RVector &action, const RVector &mean,
                                const RVector &log_std) {
    double lp = 0.0;
    for (Eigen::Index d = 0; d < action.size(); ++d) {
        const double z = (action(d) - mean(d)) * std::exp(-log_std(d));
        lp += -0.5 * z * z - log_std(d) - kHalfLog2Pi;
    }
    return lp;
}

/// Differential entropy of the diagonal Gaussian.
inline double gaussian_entropy(const RVector &log_std) {
    return (log_std.array() + 0.5 + kHalfLog2Pi).sum();
}

inline std::pair<RVector, double> gaussian_sample_logprob(const GaussianPolicyOutput &out,
                                                          Rng &rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const RVector ls = out.log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
    RVector a(out.mean.size());
    for (Eigen::Index d = 0; d < a.size(); ++d) {
        a(d) = out.mean(d) + std::exp(ls(d)) * gauss(rng);
    }
    return {a, gaussian_log_prob(a, out.mean, ls)};
}

// ---------------------------------------------------------------------------
// Losses

struct Minibatch {
    RMatrix states;
    RMatrix actions;
    RVector old_log_probs;
    RVector advantages; // already normalised when desired
    RVector returns;
};

struct LossTerms {
    double surrogate = 0.0; // maximised
    double value_loss = 0.0;
    double entropy = 0.0;
    double total = 0.0; // -surrogate - c1*entropy + c2*value_loss
    double clip_fraction = 0.0;
};

struct LossGradients {
    LossTerms terms;
    RMatrix d_mean;    // d total / d mean, action_dim x B
    RVector d_log_std; // d total / d log_std
    RVector d_values;  // d total / d V(s), length B
};

inline LossGradients ppo_losses(const Minibatch &mb, const RMatrix &means, const RVector &log_std,
                                const RVector &values, const PpoHyper &hyper) {
    const Eigen::Index batch = mb.actions.cols();
    if (batch == 0) {
        throw InputDomainError("empty minibatch");
    }
    if (means.cols() != batch || means.rows() != mb.actions.rows() ||
        values.size() != batch || mb.old_log_probs.size() != batch ||
        mb.advantages.size() != batch || mb.returns.size() != batch ||
        log_std.size() != mb.actions.rows()) {
        throw StructuralError("minibatch tensors have inconsistent shapes");
    }
    const double inv_b = 1.0 / static_cast<double>(batch);
    const RVector inv_var = (-2.0 * log_std.array()).exp().matrix();

    LossGradients g;
    g.d_mean.resize(means.rows(), batch);
    g.d_log_std = RVector::Zero(log_std.size());
    g.d_values.resize(batch);
    double surr = 0.0;
    double clipped = 0.0;
    double vloss = 0.0;
    for (Eigen::Index i = 0; i < batch; ++i) {
        const RVector diff = mb.actions.col(i) - means.col(i);
        const double lp = gaussian_log_prob(mb.actions.col(i), means.col(i), log_std);
        const double ratio = std::exp(lp - mb.old_log_probs(i));
        const double adv = mb.advantages(i);
        const double s1 = ratio * adv;
        const double s2 = clip_ratio(ratio, hyper.clip) * adv;
        surr += std::min(s1, s2);
        if (std::abs(ratio - 1.0) > hyper.clip) {
            clipped += 1.0;
        }
        // Only the unclipped branch depends on the parameters.
        const double d_lp = s1 <= s2 ? s1 : 0.0;
        const double w = -inv_b * d_lp;
        g.d_mean.col(i) = w * diff.cwiseProduct(inv_var);
        g.d_log_std += w * (diff.array().square() * inv_var.array() - 1.0).matrix();

        const double err = values(i) - mb.returns(i);
        vloss += err * err;
        g.d_values(i) = hyper.value_coeff * 2.0 * err * inv_b;
    }
    g.terms.surrogate = surr * inv_b;
    g.terms.value_loss = vloss * inv_b;
    g.terms.entropy = gaussian_entropy(log_std);
    g.terms.clip_fraction = clipped * inv_b;
    g.terms.total = -g.terms.surrogate - hyper.entropy_coeff * g.terms.entropy +
                    hyper.value_coeff * g.terms.value_loss;
    g.d_log_std.array() -= hyper.entropy_coeff;
    return g;
}

// ---------------------------------------------------------------------------
// Actors

/// Maps a batch of states (state_dim x B) to Gaussian means (action_dim x B).
class Actor {
  public:
    using LossGrad = std::function<RMatrix(const RMatrix &means)>;

    virtual ~Actor() = default;
    [[nodiscard]] virtual RMatrix mean(const RMatrix &states) const = 0;
    /// Forward pass, then backpropagates the gradient returned by `loss_grad`.
    /// `grads` is aligned with parameters().
    virtual RMatrix mean_with_gradients(const RMatrix &states, const LossGrad &loss_grad,
                                        nn::Gradients &grads) const = 0;
    virtual std::vector<RMatrix *> parameters() = 0;
    [[nodiscard]] virtual std::vector<const RMatrix *> parameters() const = 0;
    [[nodiscard]] virtual std::vector<std::string> parameter_names() const = 0;
    [[nodiscard]] virtual AgentKind kind() const = 0;
};

class MlpActor final : public Actor {
  public:
    explicit MlpActor(nn::Network net) : net_(std::move(net)) {}

    [[nodiscard]] RMatrix mean(const RMatrix &states) const override { return net_.forward(states); }

    RMatrix mean_with_gradients(const RMatrix &states, const LossGrad &loss_grad,
                                nn::Gradients &grads) const override {
        nn::ForwardCache cache;
        RMatrix out = net_.forward(states, cache);
        grads = net_.backward(cache, loss_grad(out));
        return out;
    }

    std::vector<RMatrix *> parameters() override { return net_.parameters(); }
    [[nodiscard]] std::vector<const RMatrix *> parameters() const override {
        return net_.parameters();
    }
    [[nodiscard]] std::vector<std::string> parameter_names() const override {
        return net_.parameter_names("mlp.");
    }
    [[nodiscard]] AgentKind kind() const override { return AgentKind::classical; }
    [[nodiscard]] const nn::Network &network() const { return net_; }

  private:
    nn::Network net_;
};

/// Pre-network (ending in tanh, scaled to [-pi, pi]) -> circuit -> post-network.
class HybridActor final : public Actor {
  public:
    HybridActor(nn::Network pre, quantum::PqcParameters pqc, quantum::PolicyConfig policy,
                nn::Network post)
        : pre_(std::move(pre)), pqc_(std::move(pqc)), policy_(std::move(policy)),
          post_(std::move(post)) {
        pqc_.validate();
        if (pre_.out_dim() != pqc_.num_qubits) {
            throw StructuralError("pre-network output must equal the qubit count");
        }
        if (post_.in_dim() != policy_.num_outputs() ||
            pqc_.observable_weights.rows() != policy_.num_outputs()) {
            throw StructuralError("post-network input must equal the number of measured outputs");
        }
    }

    [[nodiscard]] RMatrix mean(const RMatrix &states) const override {
        const RMatrix features = kPi * pre_.forward(states);
        return post_.forward(measure_batch(features));
    }

    RMatrix mean_with_gradients(const RMatrix &states, const LossGrad &loss_grad,
                                nn::Gradients &grads) const override {
        nn::ForwardCache pre_cache;
        nn::ForwardCache post_cache;
        const RMatrix features = kPi * pre_.forward(states, pre_cache);
        const RMatrix measured = measure_batch(features);
        RMatrix out = post_.forward(measured, post_cache);

        RMatrix d_measured;
        nn::Gradients post_grads = post_.backward(post_cache, loss_grad(out), &d_measured);

        RMatrix d_scales = RMatrix::Zero(pqc_.input_scales.rows(), pqc_.input_scales.cols());
        RMatrix d_angles = RMatrix::Zero(pqc_.rotation_angles.rows(), pqc_.rotation_angles.cols());
        RMatrix d_weights =
            RMatrix::Zero(pqc_.observable_weights.rows(), pqc_.observable_weights.cols());
        RMatrix d_features(features.rows(), features.cols());
        for (Eigen::Index b = 0; b < features.cols(); ++b) {
            const quantum::PqcGradients pg =
                quantum::pqc_backward(pqc_, policy_, features.col(b), d_measured.col(b));
            d_scales += pg.input_scales;
            d_angles += pg.rotation_angles;
            d_weights += pg.observable_weights;
            d_features.col(b) = pg.features;
        }
        nn::Gradients pre_grads = pre_.backward(pre_cache, kPi * d_features);

        grads.clear();
        for (auto &g : pre_grads) {
            grads.push_back(std::move(g));
        }
        grads.push_back(std::move(d_scales));
        grads.push_back(std::move(d_angles));
        grads.push_back(std::move(d_weights));
        for (auto &g : post_grads) {
            grads.push_back(std::move(g));
        }
        return out;
    }

    std::vector<RMatrix *> parameters() override {
        std::vector<RMatrix *> out = pre_.parameters();
        out.push_back(&pqc_.input_scales);
        out.push_back(&pqc_.rotation_angles);
        out.push_back(&pqc_.observable_weights);
        for (RMatrix *p : post_.parameters()) {
            out.push_back(p);
        }
        return out;
    }

    [[nodiscard]] std::vector<const RMatrix *> parameters() const override {
        std::vector<const RMatrix *> out = pre_.parameters();
        out.push_back(&pqc_.input_scales);
        out.push_back(&pqc_.rotation_angles);
        out.push_back(&pqc_.observable_weights);
        for (const RMatrix *p : post_.parameters()) {
            out.push_back(p);
        }
        return out;
    }

    [[nodiscard]] std::vector<std::string> parameter_names() const override {
        std::vector<std::string> out = pre_.parameter_names("pre.");
        out.emplace_back("pqc.input_scales");
        out.emplace_back("pqc.rotation_angles");
        out.emplace_back("pqc.observable_weights");
        for (auto &n : post_.parameter_names("post.")) {
            out.push_back(std::move(n));
        }
        return out;
    }

    [[nodiscard]] AgentKind kind() const override { return AgentKind::quantum; }
    [[nodiscard]] const quantum::PqcParameters &circuit() const { return pqc_; }
    [[nodiscard]] const quantum::PolicyConfig &policy() const { return policy_; }

  private:
    [[nodiscard]] RMatrix measure_batch(const RMatrix &features) const {
        RMatrix m(policy_.num_outputs(), features.cols());
        for (Eigen::Index b = 0; b < features.cols(); ++b) {
            m.col(b) = quantum::measure(quantum::run_pqc(pqc_, features.col(b)), pqc_, policy_);
        }
        return m;
    }

    nn::Network pre_;
    quantum::PqcParameters pqc_;
    quantum::PolicyConfig policy_;
    nn::Network post_;
};

struct AgentSpec {
    AgentKind kind = AgentKind::classical;
    std::vector<int> actor_hidden{1024, 1024, 1024, 1024};
    std::vector<int> critic_hidden{1024, 1024, 1024, 1024};
    int qubits = 5;
    int pqc_layers = 4;
    double inverse_temperature = 1.0;
    int pre_conv_layers = 2;
    int pre_conv_filters = 128;
    int pre_conv_kernel = 3;
    int pre_conv_stride = 2;
    int pre_dense = 64;
    std::vector<int> post_hidden{62, 32};
    double log_std_init = 0.0;

    void validate() const {
        const auto positive = [](const std::vector<int> &v) {
            return std::all_of(v.begin(), v.end(), [](int x) { return x > 0; });
        };
        if (!positive(actor_hidden)) {
            throw ConfigError("agent.actor_hidden", "layer widths must be positive");
        }
        if (!positive(critic_hidden)) {
            throw ConfigError("agent.critic_hidden", "layer widths must be positive");
        }
        if (!positive(post_hidden)) {
            throw ConfigError("agent.post_hidden", "layer widths must be positive");
        }
        if (qubits < 1 || qubits > quantum::kMaxQubits) {
            throw ConfigError("agent.qubits", "must lie in [1, 12]");
        }
        if (pqc_layers < 1) {
            throw ConfigError("agent.pqc_layers", "must be >= 1");
        }
        if (!(inverse_temperature > 0.0)) {
            throw ConfigError("agent.inverse_temperature", "must be positive");
        }
        if (pre_conv_layers < 0 || pre_conv_filters < 1 || pre_dense < 1) {
            throw ConfigError("agent.pre_conv_filters", "pre-network sizes must be positive");
        }
        if (pre_conv_kernel < 1 || pre_conv_kernel % 2 == 0) {
            throw ConfigError("agent.pre_conv_kernel", "must be a positive odd integer");
        }
        if (pre_conv_stride < 1) {
            throw ConfigError("agent.pre_conv_stride", "must be positive");
        }
        if (!(log_std_init >= kLogStdMin && log_std_init <= kLogStdMax)) {
            throw ConfigError("agent.log_std_init", "must lie in [-5, 2]");
        }
    }
};

/// Two input channels (re, im) along the CSI axis, strided convolutions, a
/// dense bottleneck and a tanh projection onto the qubit count.
inline nn::Network make_pre_network(const AgentSpec &spec, int state_dim) {
    if (state_dim % 2 != 0) {
        throw StructuralError("hybrid actor expects interleaved (re, im) states");
    }
    std::vector<nn::LayerSpec> specs;
    int channels = 2;
    int length = state_dim / 2;
    for (int i = 0; i < spec.pre_conv_layers; ++i) {
        specs.push_back(nn::LayerSpec::conv1d(channels, spec.pre_conv_filters, length,
                                              spec.pre_conv_kernel, spec.pre_conv_stride));
        specs.push_back(nn::LayerSpec::act(specs.back().out_dim, nn::Activation::relu));
        channels = spec.pre_conv_filters;
        length = specs.back().out_dim / channels;
    }
    const int flat = channels * length;
    specs.push_back(nn::LayerSpec::dense(flat, spec.pre_dense));
    specs.push_back(nn::LayerSpec::act(spec.pre_dense, nn::Activation::relu));
    specs.push_back(nn::LayerSpec::dense(spec.pre_dense, spec.qubits));
    specs.push_back(nn::LayerSpec::act(spec.qubits, nn::Activation::tanh));
    return nn::Network(std::move(specs));
}

/// Output-layer weights are shrunk so the initial Gaussian mean is close to
/// zero for every state.
inline constexpr double kPolicyHeadInitScale = 0.01;

inline void shrink_output_layer(nn::Network &net, double scale) {
    auto params = net.parameters();
    *params[params.size() - 2] *= scale;
}

inline std::unique_ptr<Actor> make_actor(const AgentSpec &spec, int state_dim, int action_dim,
                                         Rng &rng) {
    switch (spec.kind) {
    case AgentKind::classical: {
        nn::Network net = nn::mlp(state_dim, spec.actor_hidden, action_dim, nn::Activation::relu);
        net.init(rng);
        shrink_output_layer(net, kPolicyHeadInitScale);
        return std::make_unique<MlpActor>(std::move(net));
    }
    case AgentKind::quantum: {
        nn::Network pre = make_pre_network(spec, state_dim);
        pre.init(rng);
        quantum::PqcParameters pqc =
            quantum::PqcParameters::initial(spec.qubits, spec.pqc_layers, spec.qubits, rng);
        quantum::PolicyConfig policy =
            quantum::PolicyConfig::pauli_z(spec.qubits, spec.qubits, spec.inverse_temperature);
        nn::Network post = nn::mlp(spec.qubits, spec.post_hidden, action_dim, nn::Activation::relu);
        post.init(rng);
        shrink_output_layer(post, kPolicyHeadInitScale);
        return std::make_unique<HybridActor>(std::move(pre), std::move(pqc), std::move(policy),
                                             std::move(post));
    }
    case AgentKind::random:
        return nullptr;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Agent

struct UpdateStats {
    double surrogate = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
    double first_minibatch_clip_fraction = 0.0;
    int minibatches = 0;
};

struct Action {
    RVector raw;
    double log_prob = 0.0;
    double value = 0.0;
};

/// Actor, state-independent log-std, classical critic and their optimizers.
/// The random kind has none of these and samples from the environment.
class Agent {
  public:
    Agent(AgentSpec spec, int state_dim, int action_dim, PpoHyper hyper, std::uint64_t seed)
        : spec_(std::move(spec)), hyper_(hyper), state_dim_(state_dim), action_dim_(action_dim) {
        spec_.validate();
        hyper_.validate();
        if (spec_.kind == AgentKind::random) {
            return;
        }
        Rng init_rng(seed);
        actor_ = make_actor(spec_, state_dim, action_dim, init_rng);
        critic_ = nn::mlp(state_dim, spec_.critic_hidden, 1, nn::Activation::relu);
        critic_.init(init_rng);
        log_std_ = RMatrix::Constant(action_dim, 1, spec_.log_std_init);
        const nn::AdamConfig adam{hyper_.lr, 0.9, 0.999, 1e-8};
        actor_opt_ = nn::Adam(actor_param_shapes(), adam);
        critic_opt_ = nn::Adam(std::as_const(critic_).parameters(), adam);
    }

    [[nodiscard]] AgentKind kind() const { return spec_.kind; }
    [[nodiscard]] const AgentSpec &spec() const { return spec_; }
    [[nodiscard]] const PpoHyper &hyper() const { return hyper_; }
    [[nodiscard]] int state_dim() const { return state_dim_; }
    [[nodiscard]] int action_dim() const { return action_dim_; }
    [[nodiscard]] bool trainable() const { return spec_.kind != AgentKind::random; }
    [[nodiscard]] RVector log_std() const { return log_std_.col(0); }
    [[nodiscard]] const Actor *actor() const { return actor_.get(); }
    Actor *actor() { return actor_.get(); }
    [[nodiscard]] const nn::Network &critic() const { return critic_; }

    Action act(const Environment &env, const RVector &obs, Rng &rng) const {
        Action a;
        if (!trainable()) {
            a.raw = env.random_action(rng);
            return a;
        }
        const GaussianPolicyOutput out{actor_->mean(obs), log_std()};
        auto [raw, lp] = gaussian_sample_logprob(out, rng);
        a.raw = std::move(raw);
        a.log_prob = lp;
        a.value = value(obs);
        return a;
    }

    /// Deterministic action (the Gaussian mean); random agents still sample.
    RVector act_deterministic(const Environment &env, const RVector &obs, Rng &rng) const {
        if (!trainable()) {
            return env.random_action(rng);
        }
        return actor_->mean(obs);
    }

    [[nodiscard]] double value(const RVector &obs) const {
        if (!trainable()) {
            return 0.0;
        }
        return critic_.forward(obs)(0, 0);
    }

    [[nodiscard]] RVector values(const RMatrix &states) const {
        return critic_.forward(states).row(0).transpose();
    }

    /// K epochs of shuffled minibatch updates over a buffer whose advantages
    /// have been computed.
    UpdateStats update(const RolloutBuffer &buf, Rng &rng) {
        UpdateStats stats;
        if (!trainable()) {
            return stats;
        }
        if (!buf.has_advantages) {
            throw std::logic_error("update() before compute_gae()");
        }
        const int n = buf.size();
        std::vector<int> order(static_cast<std::size_t>(n));
        for (int epoch = 0; epoch < hyper_.epochs; ++epoch) {
            std::iota(order.begin(), order.end(), 0);
            std::shuffle(order.begin(), order.end(), rng);
            for (int start = 0; start < n; start += hyper_.minibatch) {
                const int len = std::min(hyper_.minibatch, n - start);
                Minibatch mb = gather(buf, order, start, len);
                mb.advantages = normalize_advantages(mb.advantages);
                const LossTerms t = update_minibatch(mb);
                if (stats.minibatches == 0) {
                    stats.first_minibatch_clip_fraction = t.clip_fraction;
                }
                stats.surrogate += t.surrogate;
                stats.value_loss += t.value_loss;
                stats.entropy += t.entropy;
                stats.clip_fraction += t.clip_fraction;
                ++stats.minibatches;
            }
        }
        const double k = stats.minibatches > 0 ? 1.0 / stats.minibatches : 0.0;
        stats.surrogate *= k;
        stats.value_loss *= k;
        stats.entropy *= k;
        stats.clip_fraction *= k;
        return stats;
    }

    /// One gradient step on actor, log-std and critic.
    LossTerms update_minibatch(const Minibatch &mb) {
        nn::ForwardCache critic_cache;
        const RVector v = critic_.forward(mb.states, critic_cache).row(0).transpose();
        LossGradients lg;
        nn::Gradients actor_grads;
        const RVector ls = log_std();
        actor_->mean_with_gradients(
            mb.states,
            [&](const RMatrix &means) {
                lg = ppo_losses(mb, means, ls, v, hyper_);
                return lg.d_mean;
            },
            actor_grads);
        actor_grads.push_back(lg.d_log_std);
        nn::Gradients critic_grads = critic_.backward(critic_cache, lg.d_values.transpose());

        nn::clip_by_global_norm(actor_grads, hyper_.max_grad_norm);
        nn::clip_by_global_norm(critic_grads, hyper_.max_grad_norm);
        actor_opt_.step(actor_params(), actor_grads);
        critic_opt_.step(critic_.parameters(), critic_grads);
        log_std_ = log_std_.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
        return lg.terms;
    }

    [[nodiscard]] Checkpoint to_checkpoint() const {
        Checkpoint ck;
        ck.set_meta("format", "simqppo-agent");
        ck.set_meta("kind", to_string(spec_.kind));
        ck.set_meta("state_dim", std::to_string(state_dim_));
        ck.set_meta("action_dim", std::to_string(action_dim_));
        if (!trainable()) {
            return ck;
        }
        const auto names = actor_names();
        const auto params = actor_param_shapes();
        for (std::size_t i = 0; i < names.size(); ++i) {
            ck.put("actor/" + names[i], *params[i]);
        }
        const auto cparams = std::as_const(critic_).parameters();
        const auto cnames = critic_.parameter_names("");
        for (std::size_t i = 0; i < cnames.size(); ++i) {
            ck.put("critic/" + cnames[i], *cparams[i]);
        }
        put_optimizer(ck, "adam_actor", actor_opt_);
        put_optimizer(ck, "adam_critic", critic_opt_);
        return ck;
    }

    void load(const Checkpoint &ck) {
        if (ck.meta("kind") != to_string(spec_.kind)) {
            throw StructuralError("checkpoint holds a '" + ck.meta("kind") + "' agent, expected '" +
                                  to_string(spec_.kind) + "'");
        }
        if (std::stoi(ck.meta("state_dim")) != state_dim_ ||
            std::stoi(ck.meta("action_dim")) != action_dim_) {
            throw StructuralError("checkpoint dimensions (" + ck.meta("state_dim") + ", " +
                                  ck.meta("action_dim") + ") differ from environment (" +
                                  std::to_string(state_dim_) + ", " +
                                  std::to_string(action_dim_) + ")");
        }
        if (!trainable()) {
            return;
        }
        const auto names = actor_names();
        auto params = actor_params();
        for (std::size_t i = 0; i < names.size(); ++i) {
            assign(*params[i], ck.get("actor/" + names[i]), names[i]);
        }
        const auto cnames = critic_.parameter_names("");
        auto cparams = critic_.parameters();
        for (std::size_t i = 0; i < cnames.size(); ++i) {
            assign(*cparams[i], ck.get("critic/" + cnames[i]), cnames[i]);
        }
        get_optimizer(ck, "adam_actor", actor_opt_);
        get_optimizer(ck, "adam_critic", critic_opt_);
    }

    std::vector<RMatrix *> actor_params() {
        std::vector<RMatrix *> p = actor_->parameters();
        p.push_back(&log_std_);
        return p;
    }

    [[nodiscard]] std::vector<const RMatrix *> actor_param_shapes() const {
        std::vector<const RMatrix *> p = std::as_const(*actor_).parameters();
        p.push_back(&log_std_);
        return p;
    }

  private:
    [[nodiscard]] std::vector<std::string> actor_names() const {
        std::vector<std::string> n = actor_->parameter_names();
        n.emplace_back("log_std");
        return n;
    }

    static void assign(RMatrix &dst, const RMatrix &src, const std::string &name) {
        if (dst.rows() != src.rows() || dst.cols() != src.cols()) {
            throw StructuralError("checkpoint tensor '" + name + "' has shape " +
                                  std::to_string(src.rows()) + "x" + std::to_string(src.cols()) +
                                  ", expected " + std::to_string(dst.rows()) + "x" +
                                  std::to_string(dst.cols()));
        }
        dst = src;
    }

    static void put_optimizer(Checkpoint &ck, const std::string &prefix, const nn::Adam &opt) {
        for (std::size_t i = 0; i < opt.first_moment().size(); ++i) {
            ck.put(prefix + "/m/" + std::to_string(i), opt.first_moment()[i]);
            ck.put(prefix + "/v/" + std::to_string(i), opt.second_moment()[i]);
        }
        ck.put(prefix + "/t", RMatrix::Constant(1, 1, static_cast<double>(opt.step_count())));
    }

    static void get_optimizer(const Checkpoint &ck, const std::string &prefix, nn::Adam &opt) {
        std::vector<RMatrix> m;
        std::vector<RMatrix> v;
        for (std::size_t i = 0; i < opt.first_moment().size(); ++i) {
            m.push_back(ck.get(prefix + "/m/" + std::to_string(i)));
            v.push_back(ck.get(prefix + "/v/" + std::to_string(i)));
            if (m.back().rows() != opt.first_moment()[i].rows() ||
                m.back().cols() != opt.first_moment()[i].cols()) {
                throw StructuralError("optimizer state shape mismatch in '" + prefix + "'");
            }
        }
        opt.restore(std::move(m), std::move(v),
                    static_cast<long>(ck.get(prefix + "/t")(0, 0)));
    }

    static Minibatch gather(const RolloutBuffer &buf, const std::vector<int> &order, int start,
                            int len) {
        Minibatch mb;
        mb.states.resize(buf.states.rows(), len);
        mb.actions.resize(buf.actions.rows(), len);
        mb.old_log_probs.resize(len);
        mb.advantages.resize(len);
        mb.returns.resize(len);
        for (int i = 0; i < len; ++i) {
            const int t = order[static_cast<std::size_t>(start + i)];
            mb.states.col(i) = buf.states.col(t);
            mb.actions.col(i) = buf.actions.col(t);
            mb.old_log_probs(i) = buf.log_probs(t);
            mb.advantages(i) = buf.advantages(t);
            mb.returns(i) = buf.returns(t);
        }
        return mb;
    }

    AgentSpec spec_;
    PpoHyper hyper_;
    int state_dim_;
    int action_dim_;
    std::unique_ptr<Actor> actor_;
    nn::Network critic_;
    RMatrix log_std_;
    nn::Adam actor_opt_;
    nn::Adam critic_opt_;
};

// ---------------------------------------------------------------------------
// Training and evaluation

struct MetricsRow {
    long iteration = 0;
    long env_steps = 0;
    double mean_asr = 0.0;
    double mean_reward = 0.0;
    double jain = 0.0;
    double qos_violation_rate = 0.0;
    double surrogate_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
    double wall_seconds = 0.0;
};

using EnvFactory = std::function<std::unique_ptr<Environment>()>;

struct TrainOptions {
    AgentSpec agent;
    PpoHyper hyper;
    long total_steps = 50'000;
    std::uint64_t seed = 0;
};

struct TrainResult {
    std::vector<MetricsRow> metrics;
    std::unique_ptr<Agent> agent;
};

/// SplitMix64 step, used to derive independent sub-seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Collect/update alternation for total_steps / batch_steps iterations.
/// Episodes continue across iteration boundaries.
inline TrainResult train(const EnvFactory &make_env, const TrainOptions &opts,
                         const std::function<void(const MetricsRow &)> &on_iteration = {}) {
    opts.hyper.validate();
    opts.agent.validate();
    if (opts.total_steps < opts.hyper.batch_steps) {
        throw ConfigError("run.total_steps", "must be at least ppo.batch_steps");
    }
    const auto start_time = std::chrono::steady_clock::now();
    std::unique_ptr<Environment> env = make_env();
    TrainResult result;
    result.agent = std::make_unique<Agent>(opts.agent, env->state_dim(), env->action_dim(),
                                           opts.hyper, mix_seed(opts.seed ^ 0xA5A5A5A5ULL));
    Agent &agent = *result.agent;
    Rng rng(mix_seed(opts.seed));
    const std::uint64_t episode_base = mix_seed(opts.seed + 0x1234567ULL);
    std::uint64_t episode = 0;

    const long iterations = opts.total_steps / opts.hyper.batch_steps;
    RolloutBuffer buf(env->state_dim(), env->action_dim(), opts.hyper.batch_steps);
    RVector obs = env->begin_episode(episode_base + episode++);
    long env_steps = 0;
    for (long it = 1; it <= iterations; ++it) {
        buf.clear();
        double asr = 0.0;
        double reward = 0.0;
        double jain = 0.0;
        double violations = 0.0;
        bool last_done = false;
        while (!buf.full()) {
            const Action a = agent.act(*env, obs, rng);
            Transition t = env->advance(as_span(a.raw));
            buf.add(obs, a.raw, a.log_prob, t.reward, a.value, t.done);
            asr += t.asr;
            reward += t.reward;
            jain += t.jain;
            violations += t.qos_ok ? 0.0 : 1.0;
            last_done = t.done;
            obs = t.done ? env->begin_episode(episode_base + episode++) : std::move(t.observation);
            ++env_steps;
        }
        UpdateStats stats;
        if (agent.trainable()) {
            buf.bootstrap_value = last_done ? 0.0 : agent.value(obs);
            compute_gae(buf, opts.hyper.gamma, opts.hyper.gae_lambda);
            stats = agent.update(buf, rng);
        }
        const double n = buf.size();
        MetricsRow row;
        row.iteration = it;
        row.env_steps = env_steps;
        row.mean_asr = asr / n;
        row.mean_reward = reward / n;
        row.jain = jain / n;
        row.qos_violation_rate = violations / n;
        row.surrogate_loss = stats.surrogate;
        row.value_loss = stats.value_loss;
        row.entropy = stats.entropy;
        row.clip_fraction = stats.clip_fraction;
        row.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
        result.metrics.push_back(row);
        if (on_iteration) {
            on_iteration(row);
        }
    }
    return result;
}

struct EvalReport {
    int episodes = 0;
    double mean_asr = 0.0;
    double asr_ci95 = 0.0; // half-width, normal approximation over episodes
    double mean_reward = 0.0;
    double mean_jain = 0.0;
    double jain_ci95 = 0.0;
    double qos_rate = 0.0;
    bool ci_degenerate = false;
    std::vector<double> episode_asr;
    std::vector<double> episode_jain;
};

inline double ci95_half_width(const std::vector<double> &xs) {
    if (xs.size() < 2) {
        return 0.0;
    }
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    return 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

/// Deterministic-policy rollouts on episodes seeded eval_seed, eval_seed+1, ...
inline EvalReport evaluate_policy(const Agent &agent, Environment &env, int episodes,
                                  std::uint64_t eval_seed) {
    if (episodes < 1) {
        throw InputDomainError("episodes must be >= 1");
    }
    if (env.state_dim() != agent.state_dim() || env.action_dim() != agent.action_dim()) {
        throw StructuralError("agent and environment dimensions differ");
    }
    Rng rng(mix_seed(eval_seed));
    EvalReport rep;
    rep.episodes = episodes;
    double reward = 0.0;
    double qos = 0.0;
    long steps = 0;
    for (int e = 0; e < episodes; ++e) {
        RVector obs = env.begin_episode(eval_seed + static_cast<std::uint64_t>(e));
        double asr = 0.0;
        double jain = 0.0;
        int len = 0;
        bool done = false;
        while (!done) {
            const RVector a = agent.act_deterministic(env, obs, rng);
            Transition t = env.advance(as_span(a));
            asr += t.asr;
            jain += t.jain;
            reward += t.reward;
            qos += t.qos_ok ? 1.0 : 0.0;
            ++len;
            ++steps;
            done = t.done;
            obs = std::move(t.observation);
        }
        rep.episode_asr.push_back(asr / len);
        rep.episode_jain.push_back(jain / len);
    }
    const double n = episodes;
    rep.mean_asr = std::accumulate(rep.episode_asr.begin(), rep.episode_asr.end(), 0.0) / n;
    rep.mean_jain = std::accumulate(rep.episode_jain.begin(), rep.episode_jain.end(), 0.0) / n;
    rep.asr_ci95 = ci95_half_width(rep.episode_asr);
    rep.jain_ci95 = ci95_half_width(rep.episode_jain);
    rep.mean_reward = reward / static_cast<double>(steps);
    rep.qos_rate = qos / static_cast<double>(steps);
    rep.ci_degenerate = episodes < 2;
    return rep;
}

} // namespace simqppo::ppo
