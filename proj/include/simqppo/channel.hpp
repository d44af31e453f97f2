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
 * @file channel.hpp
 * Spatially-correlated Rician channels from the output metasurface to the
 * legitimate users and the eavesdropper, with imperfect eavesdropper CSI.
 */
#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "geometry.hpp"
#include "types.hpp"

namespace simqppo {

struct NodePlacement {
    double horizontal_distance = 75.0; // m
    double azimuth = 0.0;              // [0, 2pi)
    double elevation = 0.0;            // [0, pi/2]
    double bs_height = 10.0;           // m

    [[nodiscard]] double link_distance() const {
        return std::hypot(bs_height, horizontal_distance);
    }
};

/// Annulus in which users and the eavesdropper are dropped.
struct PlacementRange {
    double min_distance = 75.0;
    double max_distance = 100.0;
    double bs_height = 10.0;
};

struct ChannelParams {
    double rician_factor = 1e-3;                // linear
    double ref_path_loss = 3.1622776601683794e-4; // C0 at 1 m, linear
    double path_loss_exponent = 3.5;
    double noise_power_user = 3.981071705534969e-14; // W
    double noise_power_eve = 3.981071705534969e-14;  // W
    double csi_uncertainty = 0.1;

    void validate() const {
        if (!(rician_factor >= 0.0)) {
            throw InputDomainError("rician_factor must be >= 0");
        }
        if (!(ref_path_loss > 0.0) || !(path_loss_exponent > 0.0)) {
            throw InputDomainError("path loss parameters must be positive");
        }
        if (!(noise_power_user > 0.0) || !(noise_power_eve > 0.0)) {
            throw InputDomainError("noise powers must be positive");
        }
        if (!(csi_uncertainty >= 0.0)) {
            throw InputDomainError("csi_uncertainty must be >= 0");
        }
    }
};

struct ChannelRealization {
    std::vector<CVector> h_users;
    CVector h_eve_true;
    CVector h_eve_est;
    CVector h_eve_err;
};

/// Isotropic-scattering correlation R(n, n') = sinc(2 d(n, n') / lambda).
inline RMatrix spatial_correlation(const SimGeometry &geom) {
    const int n = geom.atoms_per_layer;
    RMatrix r(n, n);
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n; ++j) {
            const double tau = 2.0 * intra_layer_distance(i, j, geom) / geom.wavelength;
            r(i - 1, j - 1) = tau == 0.0 ? 1.0 : std::sin(kPi * tau) / (kPi * tau);
        }
    }
    return r;
}

/// R together with its PSD square root. Negative eigenvalues from round-off
/// are clipped to zero.
class CorrelationFactor {
  public:
    explicit CorrelationFactor(RMatrix correlation) : r_(std::move(correlation)) {
        if (r_.rows() != r_.cols()) {
            throw StructuralError("correlation matrix must be square");
        }
        Eigen::SelfAdjointEigenSolver<RMatrix> eig(r_);
        if (eig.info() != Eigen::Success) {
            throw std::runtime_error("eigendecomposition of correlation matrix failed");
        }
        min_eigenvalue_ = eig.eigenvalues().minCoeff();
        const RVector clipped = eig.eigenvalues().cwiseMax(0.0);
        sqrt_ = eig.eigenvectors() * clipped.cwiseSqrt().asDiagonal() *
                eig.eigenvectors().transpose();
        clipped_ = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    }

    explicit CorrelationFactor(const SimGeometry &geom)
        : CorrelationFactor(spatial_correlation(geom)) {}

    [[nodiscard]] const RMatrix &correlation() const { return r_; }
    [[nodiscard]] const RMatrix &clipped() const { return clipped_; }
    [[nodiscard]] const RMatrix &sqrt() const { return sqrt_; }
    [[nodiscard]] double min_raw_eigenvalue() const { return min_eigenvalue_; }
    [[nodiscard]] Eigen::Index size() const { return r_.rows(); }

  private:
    RMatrix r_;
    RMatrix clipped_;
    RMatrix sqrt_;
    double min_eigenvalue_ = 0.0;
};

/// Far-field array response of the output layer toward a node.
inline CVector los_steering(const NodePlacement &placement, const SimGeometry &geom) {
    const int n = geom.atoms_per_layer;
    const int n_max = geom.n_max();
    const double k0 = kTwoPi * geom.atom_spacing / geom.wavelength;
    const double sx = std::sin(placement.azimuth) * std::sin(placement.elevation);
    const double sz = std::cos(placement.elevation);
    CVector a(n);
    for (int i = 1; i <= n; ++i) {
        const AtomIndex idx = atom_index(i, n_max);
        a(i - 1) = std::polar(1.0, k0 * (idx.x * sx + idx.z * sz));
    }
    return a;
}

inline double path_loss(double distance, const ChannelParams &params) {
    if (!(distance >= 1.0)) {
        throw InputDomainError("link distance below the 1 m reference distance");
    }
    return params.ref_path_loss * std::pow(distance, -params.path_loss_exponent);
}

/// sqrt(beta/(1+kappa)) * (sqrt(kappa) h_los + R^{1/2} z), z ~ CN(0, I).
inline CVector rician_channel(double beta, double kappa, const CVector &los,
                              const CorrelationFactor &corr, Rng &rng) {
    if (los.size() != corr.size()) {
        throw StructuralError("steering vector and correlation sizes differ");
    }
    CVector z(los.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        z(i) = standard_complex_normal(rng);
    }
    const CVector nlos = corr.sqrt().cast<Complex>() * z;
    return std::sqrt(beta / (1.0 + kappa)) * (std::sqrt(kappa) * los + nlos);
}

inline CVector sample_channel(const NodePlacement &placement, const ChannelParams &params,
                              const CorrelationFactor &corr, const SimGeometry &geom, Rng &rng) {
    const double beta = path_loss(placement.link_distance(), params);
    return rician_channel(beta, params.rician_factor, los_steering(placement, geom), corr, rng);
}

struct EveCsi {
    CVector estimate;
    CVector error;
};

/// Splits the true eavesdropper channel into estimate + error. The error is
/// drawn with per-entry variance (delta^2 / N) * ||h||^2 of the true channel.
inline EveCsi corrupt_eve_csi(const CVector &h_true, double delta, Rng &rng) {
    if (!(delta >= 0.0)) {
        throw InputDomainError("csi uncertainty must be >= 0");
    }
    const auto n = h_true.size();
    EveCsi out;
    out.error = CVector::Zero(n);
    if (delta > 0.0 && n > 0) {
        const double sigma = std::sqrt(delta * delta / static_cast<double>(n) * h_true.squaredNorm());
        for (Eigen::Index i = 0; i < n; ++i) {
            out.error(i) = sigma * standard_complex_normal(rng);
        }
    }
    out.estimate = h_true - out.error;
    return out;
}

inline NodePlacement sample_placement(const PlacementRange &range, Rng &rng) {
    std::uniform_real_distribution<double> radius(range.min_distance, range.max_distance);
    std::uniform_real_distribution<double> azimuth(0.0, kTwoPi);
    std::uniform_real_distribution<double> elevation(0.0, 0.5 * kPi);
    NodePlacement p;
    p.horizontal_distance = radius(rng);
    p.azimuth = azimuth(rng);
    p.elevation = elevation(rng);
    p.bs_height = range.bs_height;
    return p;
}

/// Fresh placements and fading for every user and the eavesdropper.
inline ChannelRealization sample_realization(const SimGeometry &geom, const ChannelParams &params,
                                             const CorrelationFactor &corr,
                                             const PlacementRange &range, Rng &rng) {
    ChannelRealization ch;
    ch.h_users.reserve(static_cast<std::size_t>(geom.num_users));
    for (int m = 0; m < geom.num_users; ++m) {
        const NodePlacement p = sample_placement(range, rng);
        ch.h_users.push_back(sample_channel(p, params, corr, geom, rng));
    }
    const NodePlacement eve = sample_placement(range, rng);
    ch.h_eve_true = sample_channel(eve, params, corr, geom, rng);
    EveCsi csi = corrupt_eve_csi(ch.h_eve_true, params.csi_uncertainty, rng);
    ch.h_eve_est = std::move(csi.estimate);
    ch.h_eve_err = std::move(csi.error);
    // Re-synthesised so that estimate + error reproduces it bit for bit.
    ch.h_eve_true = ch.h_eve_est + ch.h_eve_err;
    return ch;
}

} // namespace simqppo
