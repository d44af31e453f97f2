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
 * @file secrecy.hpp
 * SINRs, secrecy rates, the average-secrecy-rate objective and Jain fairness.
 *
 * Receiver rows of the effective-gain matrix are ordered users 0..M-1, then
 * the eavesdropper estimate, then the eavesdropper error term.
 */
#pragma once

#include <algorithm>
#include <cmath>

#include "channel.hpp"
#include "geometry.hpp"
#include "types.hpp"

namespace simqppo {

struct SecrecyReport {
    RVector user_sinr;
    RVector eve_sinr;
    RVector user_rate;    // bits/s/Hz
    RVector secrecy_rate; // bits/s/Hz, clamped at zero
    double asr = 0.0;
    bool qos_ok = true;
    double jain = 1.0;
};

/// Entry (r, j) = h_r^H G w_j, where w_j is column j of the antenna-to-first
/// layer matrix (stream j is fed by antenna j).
inline CMatrix effective_gains(const ChannelRealization &channels, const CMatrix &g,
                               const CMatrix &antenna_to_first) {
    const auto m = static_cast<Eigen::Index>(channels.h_users.size());
    const Eigen::Index n = g.rows();
    if (g.cols() != n || antenna_to_first.rows() != n || antenna_to_first.cols() < m) {
        throw StructuralError("transfer function and antenna matrix shapes are inconsistent");
    }
    const CMatrix beams = g * antenna_to_first.leftCols(m);
    CMatrix out(m + 2, m);
    const auto fill = [&](Eigen::Index row, const CVector &h) {
        if (h.size() != n) {
            throw StructuralError("channel vector length differs from atoms per layer");
        }
        out.row(row) = h.adjoint() * beams;
    };
    for (Eigen::Index r = 0; r < m; ++r) {
        fill(r, channels.h_users[static_cast<std::size_t>(r)]);
    }
    fill(m, channels.h_eve_est);
    fill(m + 1, channels.h_eve_err);
    return out;
}

inline double user_sinr(Eigen::Index m, const CMatrix &gains, const RVector &power,
                        double noise) {
    double interference = 0.0;
    for (Eigen::Index j = 0; j < power.size(); ++j) {
        if (j != m) {
            interference += std::norm(gains(m, j)) * power(j);
        }
    }
    return std::norm(gains(m, m)) * power(m) / (interference + noise);
}

/// The CSI error leaks into the eavesdropper's denominator as self-interference.
inline double eve_sinr(Eigen::Index m, const CMatrix &gains, const RVector &power, double noise) {
    const Eigen::Index users = power.size();
    if (gains.rows() != users + 2) {
        throw StructuralError("gain matrix lacks eavesdropper rows");
    }
    const Eigen::Index est = users;
    const Eigen::Index err = users + 1;
    double psi = std::norm(gains(err, m)) * power(m) + noise;
    for (Eigen::Index j = 0; j < users; ++j) {
        if (j != m) {
            psi += std::norm(gains(est, j) + gains(err, j)) * power(j);
        }
    }
    return std::norm(gains(est, m)) * power(m) / psi;
}

inline double secrecy_rate(double user, double eve) {
    return std::max(0.0, std::log2(1.0 + user) - std::log2(1.0 + eve));
}

/// (sum x)^2 / (n sum x^2); defined as 1 when every entry is zero.
inline double jain_index(const RVector &rates) {
    const double sq = rates.squaredNorm();
    if (sq == 0.0) {
        return 1.0;
    }
    const double s = rates.sum();
    return s * s / (static_cast<double>(rates.size()) * sq);
}

inline SecrecyReport evaluate(const ChannelRealization &channels, const CMatrix &g,
                              const CMatrix &antenna_to_first, const RVector &power,
                              const ChannelParams &params, double min_rate) {
    const CMatrix gains = effective_gains(channels, g, antenna_to_first);
    const Eigen::Index users = gains.cols();
    if (power.size() != users) {
        throw StructuralError("power allocation length differs from number of users");
    }
    SecrecyReport rep;
    rep.user_sinr.resize(users);
    rep.eve_sinr.resize(users);
    rep.user_rate.resize(users);
    rep.secrecy_rate.resize(users);
    rep.qos_ok = true;
    for (Eigen::Index m = 0; m < users; ++m) {
        rep.user_sinr(m) = user_sinr(m, gains, power, params.noise_power_user);
        rep.eve_sinr(m) = eve_sinr(m, gains, power, params.noise_power_eve);
        rep.user_rate(m) = std::log2(1.0 + rep.user_sinr(m));
        rep.secrecy_rate(m) = secrecy_rate(rep.user_sinr(m), rep.eve_sinr(m));
        rep.qos_ok = rep.qos_ok && rep.user_rate(m) >= min_rate;
    }
    rep.asr = rep.secrecy_rate.mean();
    rep.jain = jain_index(rep.secrecy_rate);
    return rep;
}

inline SecrecyReport evaluate(const ChannelRealization &channels, const PhaseConfiguration &phases,
                              const RVector &power, const PropagationMatrices &props,
                              const ChannelParams &params, double min_rate) {
    return evaluate(channels, transfer_function(phases, props), props.antenna_to_first, power,
                    params, min_rate);
}

} // namespace simqppo
