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
 * @file quantum.hpp
 * Dense statevector simulation of the hardware-efficient parameterized
 * quantum circuit used inside the hybrid actor, its observables, a softmax
 * policy head, and exact reverse-mode gradients (adjoint method).
 *
 * Qubit 0 is the most significant bit of a basis-state index, so dense
 * operators follow the usual Kronecker ordering q0 (x) q1 (x) ... .
 */
#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "types.hpp"

namespace simqppo::quantum {

inline constexpr int kMaxQubits = 12;
inline constexpr double kNormTolerance = 1e-10;

/// Row-major 2x2 matrix {a, b, c, d} = [[a, b], [c, d]].
using Gate = std::array<Complex, 4>;

inline Gate identity_gate() { return {1.0, 0.0, 0.0, 1.0}; }
inline Gate hadamard() {
    const double s = 1.0 / std::sqrt(2.0);
    return {s, s, s, -s};
}
inline Gate pauli_x() { return {0.0, 1.0, 1.0, 0.0}; }
inline Gate pauli_y() { return {0.0, Complex(0, -1), Complex(0, 1), 0.0}; }
inline Gate pauli_z() { return {1.0, 0.0, 0.0, -1.0}; }

/// exp(-i angle Y / 2)
inline Gate ry(double angle) {
    const double c = std::cos(0.5 * angle);
    const double s = std::sin(0.5 * angle);
    return {c, -s, s, c};
}

/// exp(-i angle Z / 2)
inline Gate rz(double angle) {
    return {std::polar(1.0, -0.5 * angle), 0.0, 0.0, std::polar(1.0, 0.5 * angle)};
}

inline Gate adjoint(const Gate &g) {
    return {std::conj(g[0]), std::conj(g[2]), std::conj(g[1]), std::conj(g[3])};
}

class QuantumState {
  public:
    /// |0...0> on `num_qubits` qubits.
    explicit QuantumState(int num_qubits) : num_qubits_(num_qubits) {
        if (num_qubits < 1 || num_qubits > kMaxQubits) {
            throw InputDomainError("qubit count must lie in [1, " + std::to_string(kMaxQubits) +
                                   "]");
        }
        amps_.assign(std::size_t{1} << num_qubits, Complex{0.0, 0.0});
        amps_[0] = 1.0;
    }

    explicit QuantumState(std::vector<Complex> amplitudes) : amps_(std::move(amplitudes)) {
        const std::size_t n = amps_.size();
        if (n < 2 || (n & (n - 1)) != 0) {
            throw InputDomainError("amplitude count must be a power of two");
        }
        num_qubits_ = static_cast<int>(std::countr_zero(n));
        if (num_qubits_ > kMaxQubits) {
            throw InputDomainError("too many qubits");
        }
        if (std::abs(norm() - 1.0) > kNormTolerance) {
            throw InputDomainError("state is not normalised");
        }
    }

    [[nodiscard]] int num_qubits() const { return num_qubits_; }
    [[nodiscard]] std::size_t dim() const { return amps_.size(); }
    [[nodiscard]] const std::vector<Complex> &amplitudes() const { return amps_; }
    [[nodiscard]] Complex operator[](std::size_t i) const { return amps_[i]; }

    [[nodiscard]] double norm() const {
        double s = 0.0;
        for (const Complex &a : amps_) {
            s += std::norm(a);
        }
        return std::sqrt(s);
    }

    [[nodiscard]] std::vector<double> probabilities() const {
        std::vector<double> p(amps_.size());
        std::transform(amps_.begin(), amps_.end(), p.begin(),
                       [](const Complex &a) { return std::norm(a); });
        return p;
    }

    void apply(const Gate &g, int qubit) {
        check_qubit(qubit);
        const std::size_t stride = std::size_t{1} << (num_qubits_ - 1 - qubit);
        for (std::size_t base = 0; base < amps_.size(); base += 2 * stride) {
            for (std::size_t i = base; i < base + stride; ++i) {
                const Complex a0 = amps_[i];
                const Complex a1 = amps_[i + stride];
                amps_[i] = g[0] * a0 + g[1] * a1;
                amps_[i + stride] = g[2] * a0 + g[3] * a1;
            }
        }
    }

    void apply_cz(int q1, int q2) {
        check_qubit(q1);
        check_qubit(q2);
        if (q1 == q2) {
            throw InputDomainError("CZ needs two distinct qubits");
        }
        const std::size_t mask =
            (std::size_t{1} << (num_qubits_ - 1 - q1)) | (std::size_t{1} << (num_qubits_ - 1 - q2));
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if ((i & mask) == mask) {
                amps_[i] = -amps_[i];
            }
        }
    }

    /// <this|other>
    [[nodiscard]] Complex inner(const QuantumState &other) const {
        Complex s{0.0, 0.0};
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            s += std::conj(amps_[i]) * other.amps_[i];
        }
        return s;
    }

    QuantumState &operator+=(const QuantumState &other) {
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            amps_[i] += other.amps_[i];
        }
        return *this;
    }

    QuantumState &operator*=(Complex c) {
        for (Complex &a : amps_) {
            a *= c;
        }
        return *this;
    }

    /// Unnormalised vector with the same dimension, all zeros.
    [[nodiscard]] QuantumState zeros_like() const {
        QuantumState z(*this);
        std::fill(z.amps_.begin(), z.amps_.end(), Complex{0.0, 0.0});
        return z;
    }

    std::vector<Complex> &mutable_amplitudes() { return amps_; }

  private:
    void check_qubit(int qubit) const {
        if (qubit < 0 || qubit >= num_qubits_) {
            throw InputDomainError("qubit index " + std::to_string(qubit) + " out of range");
        }
    }

    std::vector<Complex> amps_;
    int num_qubits_ = 0;
};

inline QuantumState apply_1q(QuantumState state, const Gate &g, int qubit) {
    state.apply(g, qubit);
    return state;
}

inline QuantumState apply_cz(QuantumState state, int q1, int q2) {
    state.apply_cz(q1, q2);
    return state;
}

// ---------------------------------------------------------------------------
// Observables

/// Tensor product of single-qubit Paulis, e.g. "Z0" or "Z0 X2". Hermitian by
/// construction.
class PauliString {
  public:
    PauliString() = default;

    /// Parses whitespace-separated factors like "Z0 Y3". An empty string is
    /// the identity.
    static PauliString parse(const std::string &text) {
        PauliString p;
        std::size_t i = 0;
        while (i < text.size()) {
            if (text[i] == ' ') {
                ++i;
                continue;
            }
            const char op = text[i++];
            if (op != 'X' && op != 'Y' && op != 'Z' && op != 'I') {
                throw InputDomainError("unknown Pauli factor '" + std::string(1, op) + "'");
            }
            std::size_t j = i;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
                ++j;
            }
            if (j == i) {
                throw InputDomainError("Pauli factor without qubit index in '" + text + "'");
            }
            const int q = std::stoi(text.substr(i, j - i));
            if (op != 'I') {
                p.add(op, q);
            }
            i = j;
        }
        return p;
    }

    static PauliString z(int qubit) {
        PauliString p;
        p.add('Z', qubit);
        return p;
    }

    void add(char op, int qubit) {
        for (const auto &f : factors_) {
            if (f.second == qubit) {
                throw InputDomainError("qubit repeated in Pauli string");
            }
        }
        factors_.emplace_back(op, qubit);
    }

    [[nodiscard]] const std::vector<std::pair<char, int>> &factors() const { return factors_; }

    [[nodiscard]] bool is_diagonal() const {
        return std::all_of(factors_.begin(), factors_.end(),
                           [](const auto &f) { return f.first == 'Z'; });
    }

    [[nodiscard]] QuantumState apply(QuantumState s) const {
        for (const auto &[op, q] : factors_) {
            s.apply(op == 'X' ? pauli_x() : op == 'Y' ? pauli_y() : pauli_z(), q);
        }
        return s;
    }

    [[nodiscard]] std::string str() const {
        std::string out;
        for (const auto &[op, q] : factors_) {
            if (!out.empty()) {
                out += ' ';
            }
            out += op;
            out += std::to_string(q);
        }
        return out.empty() ? "I0" : out;
    }

  private:
    std::vector<std::pair<char, int>> factors_;
};

/// Either a Pauli string or an explicit Hermitian matrix on all qubits.
class Observable {
  public:
    Observable(PauliString p) : op_(std::move(p)) {} // NOLINT(google-explicit-constructor)

    static Observable dense(CMatrix m) {
        if (m.rows() != m.cols()) {
            throw InputDomainError("observable matrix must be square");
        }
        if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
            throw InputDomainError("observable matrix is not Hermitian");
        }
        return Observable(std::move(m));
    }

    [[nodiscard]] QuantumState apply(const QuantumState &s) const {
        if (const auto *p = std::get_if<PauliString>(&op_)) {
            return p->apply(s);
        }
        const auto &m = std::get<CMatrix>(op_);
        if (static_cast<std::size_t>(m.rows()) != s.dim()) {
            throw StructuralError("observable dimension differs from state dimension");
        }
        const auto &a = s.amplitudes();
        std::vector<Complex> out(s.dim(), Complex{0.0, 0.0});
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            Complex acc{0.0, 0.0};
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                acc += m(r, c) * a[static_cast<std::size_t>(c)];
            }
            out[static_cast<std::size_t>(r)] = acc;
        }
        QuantumState res = s.zeros_like();
        res.mutable_amplitudes() = std::move(out);
        return res;
    }

    [[nodiscard]] double expectation(const QuantumState &s) const {
        if (const auto *p = std::get_if<PauliString>(&op_); p != nullptr && p->is_diagonal()) {
            const int nq = s.num_qubits();
            std::size_t mask = 0;
            for (const auto &f : p->factors()) {
                mask |= std::size_t{1} << (nq - 1 - f.second);
            }
            double e = 0.0;
            for (std::size_t i = 0; i < s.dim(); ++i) {
                const double pr = std::norm(s[i]);
                e += (std::popcount(i & mask) % 2 == 0) ? pr : -pr;
            }
            return e;
        }
        return s.inner(apply(s)).real();
    }

    [[nodiscard]] const PauliString *pauli() const { return std::get_if<PauliString>(&op_); }

  private:
    explicit Observable(CMatrix m) : op_(std::move(m)) {}
    std::variant<PauliString, CMatrix> op_;
};

/// <psi| sum_i w_i H_i |psi>
inline double expectation(const QuantumState &state, const std::vector<Observable> &terms,
                          const RVector &weights) {
    if (static_cast<Eigen::Index>(terms.size()) != weights.size()) {
        throw StructuralError("observable terms and weights differ in length");
    }
    double e = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        e += weights(static_cast<Eigen::Index>(i)) * terms[i].expectation(state);
    }
    return e;
}

/// Numerically stable softmax of zeta * expectations.
inline RVector softmax_policy(const RVector &expectations, double inverse_temperature) {
    if (!(inverse_temperature > 0.0)) {
        throw InputDomainError("inverse temperature must be positive");
    }
    const RVector z = inverse_temperature * expectations;
    const double top = z.maxCoeff();
    RVector p = (z.array() - top).exp().matrix();
    return p / p.sum();
}

// ---------------------------------------------------------------------------
// Circuit

struct PqcParameters {
    int num_qubits = 4;
    int num_layers = 3;
    /// layers x 2q; column 2i scales the RY angle of qubit i, 2i+1 the RZ angle.
    RMatrix input_scales;
    /// layers x 2q; same column layout as input_scales.
    RMatrix rotation_angles;
    /// outputs x q; row a weights H_{a,i}.
    RMatrix observable_weights;

    static PqcParameters zeros(int qubits, int layers, int outputs) {
        PqcParameters p;
        p.num_qubits = qubits;
        p.num_layers = layers;
        p.input_scales = RMatrix::Zero(layers, 2 * qubits);
        p.rotation_angles = RMatrix::Zero(layers, 2 * qubits);
        p.observable_weights = RMatrix::Zero(outputs, qubits);
        return p;
    }

    /// Scales 1, weights 1, angles uniform in [-pi, pi].
    static PqcParameters initial(int qubits, int layers, int outputs, Rng &rng) {
        PqcParameters p = zeros(qubits, layers, outputs);
        p.input_scales.setOnes();
        p.observable_weights.setOnes();
        std::uniform_real_distribution<double> u(-kPi, kPi);
        for (Eigen::Index i = 0; i < p.rotation_angles.size(); ++i) {
            p.rotation_angles.data()[i] = u(rng);
        }
        return p;
    }

    void validate() const {
        if (num_qubits < 1 || num_qubits > kMaxQubits || num_layers < 1) {
            throw InputDomainError("invalid circuit size");
        }
        if (input_scales.rows() != num_layers || input_scales.cols() != 2 * num_qubits ||
            rotation_angles.rows() != num_layers || rotation_angles.cols() != 2 * num_qubits ||
            observable_weights.cols() != num_qubits) {
            throw StructuralError("circuit parameter shapes are inconsistent");
        }
        if (!input_scales.allFinite() || !rotation_angles.allFinite() ||
            !observable_weights.allFinite()) {
            throw InputDomainError("circuit parameters must be finite");
        }
    }
};

struct PolicyConfig {
    double inverse_temperature = 1.0;
    /// observables[a][i] = H_{a,i}.
    std::vector<std::vector<Observable>> observables;

    /// H_{a,i} = Z_i for every output a.
    static PolicyConfig pauli_z(int qubits, int outputs, double zeta = 1.0) {
        PolicyConfig c;
        c.inverse_temperature = zeta;
        c.observables.resize(static_cast<std::size_t>(outputs));
        for (auto &row : c.observables) {
            for (int i = 0; i < qubits; ++i) {
                row.emplace_back(PauliString::z(i));
            }
        }
        return c;
    }

    [[nodiscard]] int num_outputs() const { return static_cast<int>(observables.size()); }
};

inline void apply_encoding_block(QuantumState &s, const PqcParameters &p, int layer,
                                 const RVector &features) {
    for (int i = 0; i < p.num_qubits; ++i) {
        s.apply(ry(p.input_scales(layer, 2 * i) * features(i)), i);
        s.apply(rz(p.input_scales(layer, 2 * i + 1) * features(i)), i);
    }
}

/// RY(phi_y) RZ(phi_z): the RZ rotation acts first.
inline void apply_variational_block(QuantumState &s, const PqcParameters &p, int layer) {
    for (int i = 0; i < p.num_qubits; ++i) {
        s.apply(rz(p.rotation_angles(layer, 2 * i + 1)), i);
        s.apply(ry(p.rotation_angles(layer, 2 * i)), i);
    }
}

/// Open nearest-neighbour CZ chain.
inline void apply_entangling_block(QuantumState &s) {
    for (int i = 0; i + 1 < s.num_qubits(); ++i) {
        s.apply_cz(i, i + 1);
    }
}

inline void check_features(const PqcParameters &params, const RVector &features) {
    if (features.size() != params.num_qubits) {
        throw StructuralError("feature length " + std::to_string(features.size()) +
                              " differs from qubit count " + std::to_string(params.num_qubits));
    }
}

/// H on every qubit, then `num_layers` rounds of encode -> variational ->
/// entangle with the features re-uploaded in every round.
inline QuantumState run_pqc(const PqcParameters &params, const RVector &features) {
    params.validate();
    check_features(params, features);
    QuantumState s(params.num_qubits);
    for (int i = 0; i < params.num_qubits; ++i) {
        s.apply(hadamard(), i);
    }
    for (int j = 0; j < params.num_layers; ++j) {
        apply_encoding_block(s, params, j, features);
        apply_variational_block(s, params, j);
        apply_entangling_block(s);
        if (std::abs(s.norm() - 1.0) > kNormTolerance) {
            throw std::runtime_error("statevector norm drifted in circuit layer " +
                                     std::to_string(j));
        }
    }
    return s;
}

/// One weighted observable sum per output row.
inline RVector measure(const QuantumState &state, const PqcParameters &params,
                       const PolicyConfig &policy) {
    if (policy.num_outputs() != params.observable_weights.rows()) {
        throw StructuralError("policy outputs differ from observable weight rows");
    }
    RVector out(policy.num_outputs());
    for (int a = 0; a < policy.num_outputs(); ++a) {
        out(a) = expectation(state, policy.observables[static_cast<std::size_t>(a)],
                             params.observable_weights.row(a).transpose());
    }
    return out;
}

struct PqcGradients {
    RMatrix input_scales;
    RMatrix rotation_angles;
    RMatrix observable_weights;
    RVector features;
    RVector expectations; // forward values, for convenience
};

namespace detail {

enum class Axis { y, z };

struct RotationOp {
    Axis axis;
    int qubit;
    int layer;
    bool encoding; // angle = scale * feature, else angle = rotation parameter
    double angle;
};

} // namespace detail

/// Reverse-mode gradient of sum_a upstream(a) * <O_a> through the statevector.
inline PqcGradients pqc_backward(const PqcParameters &params, const PolicyConfig &policy,
                                 const RVector &features, const RVector &upstream) {
    params.validate();
    check_features(params, features);
    const int nq = params.num_qubits;
    if (upstream.size() != policy.num_outputs() ||
        params.observable_weights.rows() != policy.num_outputs()) {
        throw StructuralError("upstream gradient length differs from number of outputs");
    }

    // Forward pass recording the rotation sequence; CZ chains are implicit at
    // the end of each layer.
    using detail::Axis;
    using detail::RotationOp;
    std::vector<RotationOp> ops;
    ops.reserve(static_cast<std::size_t>(params.num_layers * nq * 4));
    for (int j = 0; j < params.num_layers; ++j) {
        for (int i = 0; i < nq; ++i) {
            ops.push_back({Axis::y, i, j, true, params.input_scales(j, 2 * i) * features(i)});
            ops.push_back({Axis::z, i, j, true, params.input_scales(j, 2 * i + 1) * features(i)});
        }
        for (int i = 0; i < nq; ++i) {
            ops.push_back({Axis::z, i, j, false, params.rotation_angles(j, 2 * i + 1)});
            ops.push_back({Axis::y, i, j, false, params.rotation_angles(j, 2 * i)});
        }
    }
    const QuantumState psi_final = run_pqc(params, features);

    PqcGradients g;
    g.input_scales = RMatrix::Zero(params.num_layers, 2 * nq);
    g.rotation_angles = RMatrix::Zero(params.num_layers, 2 * nq);
    g.observable_weights = RMatrix::Zero(policy.num_outputs(), nq);
    g.features = RVector::Zero(nq);
    g.expectations = RVector::Zero(policy.num_outputs());

    // lambda = O_eff |psi> with O_eff = sum_a up_a sum_i w_ai H_ai.
    QuantumState lambda = psi_final.zeros_like();
    for (int a = 0; a < policy.num_outputs(); ++a) {
        const auto &row = policy.observables[static_cast<std::size_t>(a)];
        if (static_cast<int>(row.size()) != nq) {
            throw StructuralError("each output needs one observable per qubit");
        }
        for (int i = 0; i < nq; ++i) {
            const double h = row[static_cast<std::size_t>(i)].expectation(psi_final);
            const double w = params.observable_weights(a, i);
            g.expectations(a) += w * h;
            g.observable_weights(a, i) = upstream(a) * h;
            const double coeff = upstream(a) * w;
            if (coeff != 0.0) {
                QuantumState t = row[static_cast<std::size_t>(i)].apply(psi_final);
                t *= coeff;
                lambda += t;
            }
        }
    }

    QuantumState psi = psi_final;
    const auto undo_entangle = [&](QuantumState &s) {
        for (int i = nq - 2; i >= 0; --i) {
            s.apply_cz(i, i + 1);
        }
    };
    std::size_t k = ops.size();
    for (int j = params.num_layers - 1; j >= 0; --j) {
        undo_entangle(psi);
        undo_entangle(lambda);
        const std::size_t layer_begin = k - static_cast<std::size_t>(4 * nq);
        while (k > layer_begin) {
            const RotationOp &op = ops[--k];
            const Gate gen = op.axis == Axis::y ? pauli_y() : pauli_z();
            // d/dtheta <O> = Im <lambda| P |psi_after>.
            QuantumState p_psi = psi;
            p_psi.apply(gen, op.qubit);
            const double d_angle = lambda.inner(p_psi).imag();
            const int col = 2 * op.qubit + (op.axis == Axis::y ? 0 : 1);
            if (op.encoding) {
                g.input_scales(op.layer, col) += d_angle * features(op.qubit);
                g.features(op.qubit) += d_angle * params.input_scales(op.layer, col);
            } else {
                g.rotation_angles(op.layer, col) += d_angle;
            }
            const Gate inv = adjoint(op.axis == Axis::y ? ry(op.angle) : rz(op.angle));
            psi.apply(inv, op.qubit);
            lambda.apply(inv, op.qubit);
        }
    }
    return g;
}

} // namespace simqppo::quantum
