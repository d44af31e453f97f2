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
 * @file neural.hpp
 * A small feed-forward network toolkit: dense and 1-D convolution layers,
 * elementwise activations, hand-written reverse-mode gradients and Adam.
 *
 * Batches are column-major: an input batch is (in_dim x batch). Convolution
 * inputs store position-major data, i.e. element (pos, channel) of a sample
 * sits at row pos * channels + channel.
 */
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "types.hpp"

namespace simqppo::nn {

enum class Activation { identity, relu, tanh };
enum class LayerKind { dense, conv1d, activation };

inline std::string to_string(Activation a) {
    switch (a) {
    case Activation::identity:
        return "identity";
    case Activation::relu:
        return "relu";
    case Activation::tanh:
        return "tanh";
    }
    return "?";
}

struct LayerSpec {
    LayerKind kind = LayerKind::dense;
    int in_dim = 0;
    int out_dim = 0;
    int in_channels = 1;
    int out_channels = 1;
    int kernel_size = 1;
    int stride = 1;
    Activation activation = Activation::identity;

    static LayerSpec dense(int in, int out) {
        LayerSpec s;
        s.kind = LayerKind::dense;
        s.in_dim = in;
        s.out_dim = out;
        return s;
    }

    /// Same-padded 1-D convolution over `length` positions.
    static LayerSpec conv1d(int in_channels, int out_channels, int length, int kernel, int stride) {
        if (kernel < 1 || kernel % 2 == 0 || stride < 1 || length < 1) {
            throw InputDomainError("conv1d needs an odd kernel, positive stride and length");
        }
        LayerSpec s;
        s.kind = LayerKind::conv1d;
        s.in_channels = in_channels;
        s.out_channels = out_channels;
        s.kernel_size = kernel;
        s.stride = stride;
        s.in_dim = in_channels * length;
        const int pad = kernel / 2;
        const int out_len = (length + 2 * pad - kernel) / stride + 1;
        s.out_dim = out_channels * out_len;
        return s;
    }

    static LayerSpec act(int dim, Activation a) {
        LayerSpec s;
        s.kind = LayerKind::activation;
        s.in_dim = dim;
        s.out_dim = dim;
        s.activation = a;
        return s;
    }

    [[nodiscard]] int in_length() const { return in_dim / in_channels; }
    [[nodiscard]] int out_length() const { return out_dim / out_channels; }
    [[nodiscard]] bool has_parameters() const { return kind != LayerKind::activation; }
};

struct ForwardCache {
    /// inputs[i] is the input of layer i; the last entry is the network output.
    std::vector<RMatrix> inputs;
};

using Gradients = std::vector<RMatrix>;

inline double global_norm(const Gradients &grads) {
    double s = 0.0;
    for (const auto &g : grads) {
        s += g.squaredNorm();
    }
    return std::sqrt(s);
}

/// Rescales in place so the joint L2 norm is at most `max_norm`; returns the
/// norm before clipping.
inline double clip_by_global_norm(Gradients &grads, double max_norm) {
    const double n = global_norm(grads);
    if (n > max_norm && n > 0.0) {
        const double f = max_norm / n;
        for (auto &g : grads) {
            g *= f;
        }
    }
    return n;
}

namespace detail {

inline RMatrix im2col(const RMatrix &x, const LayerSpec &s) {
    const int cin = s.in_channels;
    const int lin = s.in_length();
    const int lout = s.out_length();
    const int pad = s.kernel_size / 2;
    const auto batch = x.cols();
    RMatrix cols = RMatrix::Zero(static_cast<Eigen::Index>(s.kernel_size) * cin, lout * batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
        for (int o = 0; o < lout; ++o) {
            for (int k = 0; k < s.kernel_size; ++k) {
                const int src = o * s.stride - pad + k;
                if (src < 0 || src >= lin) {
                    continue;
                }
                cols.block(static_cast<Eigen::Index>(k) * cin, b * lout + o, cin, 1) =
                    x.block(static_cast<Eigen::Index>(src) * cin, b, cin, 1);
            }
        }
    }
    return cols;
}

inline RMatrix col2im(const RMatrix &cols, const LayerSpec &s, Eigen::Index batch) {
    const int cin = s.in_channels;
    const int lin = s.in_length();
    const int lout = s.out_length();
    const int pad = s.kernel_size / 2;
    RMatrix x = RMatrix::Zero(s.in_dim, batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
        for (int o = 0; o < lout; ++o) {
            for (int k = 0; k < s.kernel_size; ++k) {
                const int src = o * s.stride - pad + k;
                if (src < 0 || src >= lin) {
                    continue;
                }
                x.block(static_cast<Eigen::Index>(src) * cin, b, cin, 1) +=
                    cols.block(static_cast<Eigen::Index>(k) * cin, b * lout + o, cin, 1);
            }
        }
    }
    return x;
}

} // namespace detail

class Network {
  public:
    Network() = default;

    explicit Network(std::vector<LayerSpec> specs) : specs_(std::move(specs)) {
        if (specs_.empty()) {
            throw StructuralError("network needs at least one layer");
        }
        for (std::size_t i = 0; i < specs_.size(); ++i) {
            const LayerSpec &s = specs_[i];
            if (s.in_dim < 1 || s.out_dim < 1) {
                throw StructuralError("layer " + std::to_string(i) + " has empty dimensions");
            }
            if (i > 0 && specs_[i - 1].out_dim != s.in_dim) {
                throw StructuralError("layer " + std::to_string(i) + " expects " +
                                      std::to_string(s.in_dim) + " inputs but receives " +
                                      std::to_string(specs_[i - 1].out_dim));
            }
            if (s.kind == LayerKind::conv1d && s.in_dim % s.in_channels != 0) {
                throw StructuralError("conv1d input not divisible by channel count");
            }
            if (s.kind == LayerKind::dense) {
                weights_.emplace_back(RMatrix::Zero(s.out_dim, s.in_dim));
                biases_.emplace_back(RMatrix::Zero(s.out_dim, 1));
            } else if (s.kind == LayerKind::conv1d) {
                weights_.emplace_back(
                    RMatrix::Zero(s.out_channels, s.kernel_size * s.in_channels));
                biases_.emplace_back(RMatrix::Zero(s.out_channels, 1));
            } else {
                weights_.emplace_back();
                biases_.emplace_back();
            }
        }
    }

    /// Weights uniform in +-1/sqrt(fan_in), biases zero.
    void init(Rng &rng, double weight_scale = 1.0) {
        for (std::size_t i = 0; i < specs_.size(); ++i) {
            const LayerSpec &s = specs_[i];
            if (!s.has_parameters()) {
                continue;
            }
            const int fan_in = s.kind == LayerKind::dense ? s.in_dim : s.kernel_size * s.in_channels;
            const double bound = weight_scale / std::sqrt(static_cast<double>(fan_in));
            std::uniform_real_distribution<double> u(-bound, bound);
            RMatrix &w = weights_[i];
            for (Eigen::Index k = 0; k < w.size(); ++k) {
                w.data()[k] = u(rng);
            }
            biases_[i].setZero();
        }
    }

    [[nodiscard]] int in_dim() const { return specs_.front().in_dim; }
    [[nodiscard]] int out_dim() const { return specs_.back().out_dim; }
    [[nodiscard]] const std::vector<LayerSpec> &specs() const { return specs_; }

    [[nodiscard]] RMatrix forward(const RMatrix &x) const {
        ForwardCache scratch;
        return forward(x, scratch);
    }

    RMatrix forward(const RMatrix &x, ForwardCache &cache) const {
        if (x.rows() != in_dim()) {
            throw StructuralError("network input has " + std::to_string(x.rows()) +
                                  " rows, expected " + std::to_string(in_dim()));
        }
        cache.inputs.clear();
        cache.inputs.reserve(specs_.size() + 1);
        cache.inputs.push_back(x);
        for (std::size_t i = 0; i < specs_.size(); ++i) {
            cache.inputs.push_back(layer_forward(i, cache.inputs.back()));
        }
        return cache.inputs.back();
    }

    /// Parameter gradients (aligned with parameters()) for the upstream
    /// gradient `dout`; writes the input gradient when `dinput` is given.
    Gradients backward(const ForwardCache &cache, const RMatrix &dout,
                       RMatrix *dinput = nullptr) const {
        if (cache.inputs.size() != specs_.size() + 1) {
            throw std::logic_error("backward() requires the cache of a forward pass");
        }
        if (dout.rows() != out_dim() || dout.cols() != cache.inputs.back().cols()) {
            throw StructuralError("output gradient shape differs from forward output");
        }
        std::vector<RMatrix> dw(specs_.size());
        std::vector<RMatrix> db(specs_.size());
        RMatrix grad = dout;
        for (std::size_t ii = specs_.size(); ii-- > 0;) {
            const LayerSpec &s = specs_[ii];
            const RMatrix &in = cache.inputs[ii];
            const RMatrix &out = cache.inputs[ii + 1];
            switch (s.kind) {
            case LayerKind::dense:
                dw[ii] = grad * in.transpose();
                db[ii] = grad.rowwise().sum();
                grad = weights_[ii].transpose() * grad;
                break;
            case LayerKind::conv1d: {
                const Eigen::Index batch = in.cols();
                const int lout = s.out_length();
                const Eigen::Map<const RMatrix> g2(grad.data(), s.out_channels, lout * batch);
                const RMatrix cols = detail::im2col(in, s);
                dw[ii] = g2 * cols.transpose();
                db[ii] = g2.rowwise().sum();
                const RMatrix dcols = weights_[ii].transpose() * g2;
                grad = detail::col2im(dcols, s, batch);
                break;
            }
            case LayerKind::activation:
                switch (s.activation) {
                case Activation::identity:
                    break;
                case Activation::relu:
                    // Subgradient 0 at exactly 0.
                    grad = grad.cwiseProduct(
                        (in.array() > 0.0).cast<double>().matrix());
                    break;
                case Activation::tanh:
                    grad = grad.cwiseProduct((1.0 - out.array().square()).matrix());
                    break;
                }
                break;
            }
        }
        if (dinput != nullptr) {
            *dinput = std::move(grad);
        }
        Gradients flat;
        for (std::size_t i = 0; i < specs_.size(); ++i) {
            if (specs_[i].has_parameters()) {
                flat.push_back(std::move(dw[i]));
                flat.push_back(std::move(db[i]));
            }
        }
        return flat;
    }

    /// Weight then bias for every parametrised layer, in layer order.
    std::vector<RMatrix *> parameters() {
        std::vector<RMatrix *> out;
        for (std::size_t i = 0; i < specs_.size(); ++i) {
            if (specs_[i].has_parameters()) {
                out.push_back(&weights_[i]);
                out.push_back(&biases_[i]);
            }
        }
        return out;
    }

    [[nodiscard]] std::vector<const RMatrix *> parameters() const {
        std::vector<const RMatrix *> out;
        for (std::size_t i = 0; i < specs_.size(); ++i) {
            if (specs_[i].has_parameters()) {
                out.push_back(&weights_[i]);
                out.push_back(&biases_[i]);
            }
        }
        return out;
    }

    [[nodiscard]] std::vector<std::string> parameter_names(const std::string &prefix) const {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < specs_.size(); ++i) {
            if (specs_[i].has_parameters()) {
                out.push_back(prefix + "layer" + std::to_string(i) + ".weight");
                out.push_back(prefix + "layer" + std::to_string(i) + ".bias");
            }
        }
        return out;
    }

    [[nodiscard]] Gradients zero_gradients() const {
        Gradients g;
        for (const RMatrix *p : parameters()) {
            g.push_back(RMatrix::Zero(p->rows(), p->cols()));
        }
        return g;
    }

  private:
    [[nodiscard]] RMatrix layer_forward(std::size_t i, const RMatrix &x) const {
        const LayerSpec &s = specs_[i];
        switch (s.kind) {
        case LayerKind::dense: {
            RMatrix y = weights_[i] * x;
            y.colwise() += biases_[i].col(0);
            return y;
        }
        case LayerKind::conv1d: {
            const Eigen::Index batch = x.cols();
            const RMatrix cols = detail::im2col(x, s);
            RMatrix y2 = weights_[i] * cols;
            y2.colwise() += biases_[i].col(0);
            // (Cout x Lout*B) and (Cout*Lout x B) share the same memory layout.
            return Eigen::Map<const RMatrix>(y2.data(), s.out_dim, batch);
        }
        case LayerKind::activation:
            switch (s.activation) {
            case Activation::identity:
                return x;
            case Activation::relu:
                return x.cwiseMax(0.0);
            case Activation::tanh:
                return x.array().tanh().matrix();
            }
        }
        throw std::logic_error("unknown layer kind");
    }

    std::vector<LayerSpec> specs_;
    std::vector<RMatrix> weights_;
    std::vector<RMatrix> biases_;
};

/// dense -> act -> ... -> dense, with `out_act` after the last layer.
inline Network mlp(int in_dim, const std::vector<int> &hidden, int out_dim, Activation hidden_act,
                   Activation out_act = Activation::identity) {
    std::vector<LayerSpec> specs;
    int prev = in_dim;
    for (int h : hidden) {
        specs.push_back(LayerSpec::dense(prev, h));
        specs.push_back(LayerSpec::act(h, hidden_act));
        prev = h;
    }
    specs.push_back(LayerSpec::dense(prev, out_dim));
    if (out_act != Activation::identity) {
        specs.push_back(LayerSpec::act(out_dim, out_act));
    }
    return Network(std::move(specs));
}

struct AdamConfig {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Bias-corrected adaptive-moment optimizer over a fixed list of tensors.
class Adam {
  public:
    Adam() = default;

    Adam(const std::vector<const RMatrix *> &shapes, AdamConfig cfg) : cfg_(cfg) {
        for (const RMatrix *p : shapes) {
            m_.push_back(RMatrix::Zero(p->rows(), p->cols()));
            v_.push_back(RMatrix::Zero(p->rows(), p->cols()));
        }
    }

    void step(const std::vector<RMatrix *> &params, const Gradients &grads) {
        if (params.size() != m_.size() || grads.size() != m_.size()) {
            throw StructuralError("optimizer tensor count mismatch");
        }
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            RMatrix &p = *params[i];
            const RMatrix &g = grads[i];
            if (g.rows() != p.rows() || g.cols() != p.cols() || m_[i].rows() != p.rows() ||
                m_[i].cols() != p.cols()) {
                throw StructuralError("gradient shape differs from parameter shape");
            }
            m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
            v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
            p.array() -= cfg_.lr * (m_[i].array() / bc1) /
                         ((v_[i].array() / bc2).sqrt() + cfg_.eps);
        }
    }

    [[nodiscard]] const AdamConfig &config() const { return cfg_; }
    [[nodiscard]] long step_count() const { return t_; }
    [[nodiscard]] const std::vector<RMatrix> &first_moment() const { return m_; }
    [[nodiscard]] const std::vector<RMatrix> &second_moment() const { return v_; }

    void restore(std::vector<RMatrix> m, std::vector<RMatrix> v, long t) {
        if (m.size() != m_.size() || v.size() != v_.size()) {
            throw StructuralError("optimizer state tensor count mismatch");
        }
        m_ = std::move(m);
        v_ = std::move(v);
        t_ = t;
    }

  private:
    AdamConfig cfg_;
    std::vector<RMatrix> m_;
    std::vector<RMatrix> v_;
    long t_ = 0;
};

} // namespace simqppo::nn
