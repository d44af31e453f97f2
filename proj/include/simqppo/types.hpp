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
 * @file types.hpp
 * Shared numeric aliases and the error types used across the library.
 */
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace simqppo {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// Every stochastic routine takes one of these by reference; seeding it is the
/// caller's job.
using Rng = std::mt19937_64;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// An argument lies outside the mathematical domain of the operation.
class InputDomainError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Shapes or dimensions of collaborating objects do not line up.
class StructuralError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// A configuration value is missing or violates a constraint. `field()` names
/// the offending key.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string field, const std::string &message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

    [[nodiscard]] const std::string &field() const noexcept { return field_; }

  private:
    std::string field_;
};

inline std::span<const double> as_span(const RVector &v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

/// Reduce an angle into [0, 2pi).
inline double wrap_phase(double angle) {
    double r = std::fmod(angle, kTwoPi);
    if (r < 0.0) {
        r += kTwoPi;
    }
    if (r >= kTwoPi) {
        r = 0.0;
    }
    return r;
}

/// Circularly-symmetric complex Gaussian with unit variance.
inline Complex standard_complex_normal(Rng &rng) {
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    const double re = gauss(rng);
    const double im = gauss(rng);
    return {re, im};
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

} // namespace simqppo
