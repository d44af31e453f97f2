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
// Shared helpers for the unit suites.
#pragma once

#include <cstdint>
#include <random>

#include "simqppo/channel.hpp"
#include "simqppo/geometry.hpp"
#include "simqppo/types.hpp"

namespace simqppo::testing {

inline CVector random_cvector(Eigen::Index n, Rng &rng, double scale = 1.0) {
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = scale * standard_complex_normal(rng);
    }
    return v;
}

inline CMatrix random_cmatrix(Eigen::Index r, Eigen::Index c, Rng &rng) {
    CMatrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = standard_complex_normal(rng);
    }
    return m;
}

inline RMatrix random_rmatrix(Eigen::Index r, Eigen::Index c, Rng &rng, double lo = -1.0,
                              double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    RMatrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = u(rng);
    }
    return m;
}

inline RMatrix random_phases(int layers, int atoms, Rng &rng) {
    return random_rmatrix(layers, atoms, rng, 0.0, kTwoPi - 1e-9);
}

/// Small but non-trivial layout used across suites.
inline SimGeometry small_geometry(int layers = 2, int atoms = 9, int antennas = 2, int users = 2) {
    return SimGeometry::with_wavelength(10.7e-3, layers, atoms, antennas, users);
}

inline double rel_err(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

} // namespace simqppo::testing
