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
 * @file geometry.hpp
 * Physical layout of a stacked intelligent metasurface (SIM), the
 * Rayleigh-Sommerfeld propagation coefficients between its layers, and the
 * cascaded transfer function.
 *
 * Atom and antenna indices in the distance helpers are 1-based, matching the
 * lattice formulas. Matrix rows/columns are 0-based as usual.
 */
#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "types.hpp"

namespace simqppo {

struct SimGeometry {
    int num_layers = 3;
    int atoms_per_layer = 25;
    int num_antennas = 4;
    int num_users = 3;
    double atom_spacing = 0.5 * 10.7e-3;    // m
    double wavelength = 10.7e-3;            // m
    double total_thickness = 5.0 * 10.7e-3; // antenna array to output layer, m
    double atom_area = 0.25 * 10.7e-3 * 10.7e-3;

    /// Table defaults with the wavelength-relative quantities recomputed.
    static SimGeometry with_wavelength(double wavelength, int layers, int atoms, int antennas,
                                       int users) {
        SimGeometry g;
        g.num_layers = layers;
        g.atoms_per_layer = atoms;
        g.num_antennas = antennas;
        g.num_users = users;
        g.wavelength = wavelength;
        g.atom_spacing = 0.5 * wavelength;
        g.total_thickness = 5.0 * wavelength;
        g.atom_area = 0.25 * wavelength * wavelength;
        return g;
    }

    [[nodiscard]] int n_max() const {
        return static_cast<int>(std::lround(std::sqrt(static_cast<double>(atoms_per_layer))));
    }
    [[nodiscard]] double layer_gap() const { return total_thickness / num_layers; }
    [[nodiscard]] double antenna_spacing() const { return 0.5 * wavelength; }

    void validate() const {
        if (num_layers < 1) {
            throw InputDomainError("num_layers must be positive");
        }
        if (atoms_per_layer < 1 || n_max() * n_max() != atoms_per_layer) {
            throw InputDomainError("atoms_per_layer must be a positive perfect square");
        }
        if (num_antennas < 1 || num_users < 1) {
            throw InputDomainError("num_antennas and num_users must be positive");
        }
        if (num_users > num_antennas) {
            throw InputDomainError("num_users must not exceed num_antennas");
        }
        if (!(atom_spacing > 0.0) || !(wavelength > 0.0) || !(total_thickness > 0.0) ||
            !(atom_area > 0.0)) {
            throw InputDomainError("geometry lengths must be strictly positive");
        }
    }
};

struct AtomIndex {
    int x;
    int z;
    friend bool operator==(const AtomIndex &, const AtomIndex &) = default;
};

/// Lattice coordinates of atom `n` (1-based) on an n_max x n_max surface.
inline AtomIndex atom_index(int n, int n_max) {
    if (n_max < 1 || n < 1 || n > n_max * n_max) {
        throw InputDomainError("atom index " + std::to_string(n) + " outside [1, " +
                               std::to_string(n_max * n_max) + "]");
    }
    return {(n - 1) % n_max + 1, (n + n_max - 1) / n_max};
}

inline double intra_layer_distance(int n, int n_prime, const SimGeometry &geom) {
    const int n_max = geom.n_max();
    const AtomIndex a = atom_index(n, n_max);
    const AtomIndex b = atom_index(n_prime, n_max);
    const double dx = a.x - b.x;
    const double dz = a.z - b.z;
    return geom.atom_spacing * std::sqrt(dx * dx + dz * dz);
}

/// Distance between atom n on one layer and atom n' on the next one.
inline double inter_layer_distance(int n, int n_prime, const SimGeometry &geom) {
    return std::hypot(intra_layer_distance(n, n_prime, geom), geom.layer_gap());
}

/// Distance from antenna `k` (1-based) to atom `n` on the first layer. The
/// antenna array is a uniform linear array with half-wavelength spacing along z,
/// centred on the metasurface.
inline double antenna_to_layer_distance(int k, int n, const SimGeometry &geom) {
    if (k < 1 || k > geom.num_antennas) {
        throw InputDomainError("antenna index " + std::to_string(k) + " out of range");
    }
    const int n_max = geom.n_max();
    const AtomIndex a = atom_index(n, n_max);
    const double centre = 0.5 * (n_max + 1);
    const double z_off = (a.z - centre) * geom.atom_spacing -
                         geom.antenna_spacing() * (k - 0.5 * (geom.num_antennas + 1));
    const double x_off = (a.x - centre) * geom.atom_spacing;
    const double d = geom.layer_gap();
    return std::sqrt(z_off * z_off + x_off * x_off + d * d);
}

/// Rayleigh-Sommerfeld transmission coefficient across a propagation distance.
/// The phase term is 2*pi*dist/lambda.
inline Complex diffraction_coefficient(double dist, const SimGeometry &geom) {
    if (!(dist > 0.0)) {
        throw InputDomainError("propagation distance must be positive");
    }
    const double lambda = geom.wavelength;
    const double amplitude = geom.atom_area * geom.layer_gap() / (dist * dist);
    const Complex obliquity(1.0 / (kTwoPi * dist), -1.0 / lambda);
    return amplitude * obliquity * std::polar(1.0, kTwoPi * dist / lambda);
}

struct PropagationMatrices {
    /// N x K, antenna k -> first-layer atom n at (n, k).
    CMatrix antenna_to_first;
    /// L-1 matrices N x N; entry [l-2] maps layer l-1 to layer l.
    std::vector<CMatrix> inter_layer;
};

inline PropagationMatrices build_propagation_matrices(const SimGeometry &geom) {
    geom.validate();
    const int n_atoms = geom.atoms_per_layer;
    PropagationMatrices props;
    props.antenna_to_first.resize(n_atoms, geom.num_antennas);
    for (int n = 1; n <= n_atoms; ++n) {
        for (int k = 1; k <= geom.num_antennas; ++k) {
            props.antenna_to_first(n - 1, k - 1) =
                diffraction_coefficient(antenna_to_layer_distance(k, n, geom), geom);
        }
    }
    CMatrix inner(n_atoms, n_atoms);
    for (int n = 1; n <= n_atoms; ++n) {
        for (int np = 1; np <= n_atoms; ++np) {
            inner(n - 1, np - 1) = diffraction_coefficient(inter_layer_distance(np, n, geom), geom);
        }
    }
    // Uniform gaps make every inter-layer matrix identical.
    props.inter_layer.assign(static_cast<std::size_t>(geom.num_layers - 1), inner);
    return props;
}

/// Per-layer phase shifts, L x N, every entry in [0, 2pi).
class PhaseConfiguration {
  public:
    PhaseConfiguration() = default;

    explicit PhaseConfiguration(RMatrix phases) : phases_(std::move(phases)) {
        for (Eigen::Index i = 0; i < phases_.size(); ++i) {
            const double v = phases_.data()[i];
            if (!(v >= 0.0 && v < kTwoPi)) {
                throw InputDomainError("phase shift outside [0, 2pi)");
            }
        }
    }

    /// Reduces every entry modulo 2pi before validation.
    static PhaseConfiguration wrapped(RMatrix phases) {
        phases = phases.unaryExpr([](double v) { return wrap_phase(v); });
        return PhaseConfiguration(std::move(phases));
    }

    static PhaseConfiguration zeros(int layers, int atoms) {
        return PhaseConfiguration(RMatrix::Zero(layers, atoms));
    }

    [[nodiscard]] int num_layers() const { return static_cast<int>(phases_.rows()); }
    [[nodiscard]] int atoms_per_layer() const { return static_cast<int>(phases_.cols()); }
    [[nodiscard]] const RMatrix &matrix() const { return phases_; }
    [[nodiscard]] RVector layer(int l) const { return phases_.row(l).transpose(); }

  private:
    RMatrix phases_;
};

inline CMatrix phase_matrix(const RVector &layer_phases) {
    const auto n = layer_phases.size();
    CMatrix phi = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v = layer_phases(i);
        if (!(v >= 0.0 && v < kTwoPi)) {
            throw InputDomainError("phase shift outside [0, 2pi)");
        }
        phi(i, i) = std::polar(1.0, v);
    }
    return phi;
}

/// G = Phi^L W^L ... Phi^2 W^2 Phi^1. The antenna-to-first-layer matrix is
/// not part of G.
inline CMatrix transfer_function(const PhaseConfiguration &phases,
                                 const PropagationMatrices &props) {
    const int layers = phases.num_layers();
    const int n = phases.atoms_per_layer();
    if (layers < 1 || static_cast<int>(props.inter_layer.size()) != layers - 1) {
        throw StructuralError("phase configuration has " + std::to_string(layers) +
                              " layers but propagation matrices describe " +
                              std::to_string(props.inter_layer.size() + 1));
    }
    if (props.antenna_to_first.rows() != n) {
        throw StructuralError("atoms per layer differ between phases and propagation");
    }
    // Diagonal factors are applied as row scalings.
    const auto row_scale = [&](CMatrix &m, int l) {
        for (int i = 0; i < n; ++i) {
            m.row(i) *= std::polar(1.0, phases.matrix()(l, i));
        }
    };
    CMatrix g = CMatrix::Identity(n, n);
    row_scale(g, 0);
    for (int l = 1; l < layers; ++l) {
        const CMatrix &w = props.inter_layer[static_cast<std::size_t>(l - 1)];
        if (w.rows() != n || w.cols() != n) {
            throw StructuralError("inter-layer matrix has wrong shape");
        }
        g = w * g;
        row_scale(g, l);
    }
    return g;
}

} // namespace simqppo
