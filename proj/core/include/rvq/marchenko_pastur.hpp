// SPDX-License-Identifier: Apache-2.0
//
// rvq - limited-feedback MIMO precoding with random vector quantization
// Copyright (C) 2026 The rvq authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <functional>

#include "rvq/randmat.hpp"

namespace rvq::asymptotics {

using randmat::GramSide;

/// Limiting eigenvalue law of (1/N_t) H H^H (receive side) or (1/N_t) H^H H
/// (transmit side) for an N_r x N_t i.i.d. channel with ratio N_r/N_t.
///
/// The continuous part lives on [a, b] = [(1 - sqrt r)^2, (1 + sqrt r)^2].
/// Whichever side is larger carries an atom at zero: transmit side weight
/// 1 - r when r < 1, receive side weight 1 - 1/r when r > 1.
class MPDensity {
public:
    MPDensity(double ratio, GramSide side);

    double ratio() const noexcept { return ratio_; }
    GramSide side() const noexcept { return side_; }
    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double point_mass() const noexcept { return point_mass_; }
    /// c in pdf(lambda) = c sqrt((lambda - a)(b - lambda)) / lambda.
    double prefactor() const noexcept { return scale_; }

    /// Continuous density at lambda (zero outside [a, b]).
    double pdf(double lambda) const noexcept;

private:
    double ratio_;
    GramSide side_;
    double a_, b_, point_mass_, scale_;
};

inline constexpr double kQuadratureTolerance = 1e-9;

/// Integral of f against the full law, including f(0) times the atom.
/// Uses lambda = a + (b - a) cos^2(theta/2), which turns the square-root edge
/// behaviour into a smooth integrand, and adaptive Gauss-Kronrod on theta.
/// Throws SolverError if the error estimate stays above 1e-9.
double mp_integrate(const MPDensity& g, const std::function<double(double)>& f);

/// As mp_integrate, but f(lambda, b - lambda) also receives the distance to
/// the upper edge computed without cancellation, for integrands that are
/// singular at lambda = b.
double mp_integrate_edge(const MPDensity& g, const std::function<double(double, double)>& f);

/// Integral of f * g over [lower, b] of the continuous part only.
/// lower is clamped to [a, b].
double mp_integrate_tail(const MPDensity& g, const std::function<double(double)>& f, double lower);

}  // namespace rvq::asymptotics
