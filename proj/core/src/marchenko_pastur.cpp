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

#include "rvq/marchenko_pastur.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rvq/errors.hpp"

namespace rvq::asymptotics {

MPDensity::MPDensity(double ratio, GramSide side) : ratio_(ratio), side_(side) {
    if (!(ratio > 0.0) || !std::isfinite(ratio))
        throw InvalidArgument("MPDensity: ratio must be finite and > 0");
    const double s = std::sqrt(ratio);
    a_ = (1.0 - s) * (1.0 - s);
    b_ = (1.0 + s) * (1.0 + s);
    if (side == GramSide::receive) {
        scale_ = 1.0 / (2.0 * std::numbers::pi * ratio);
        point_mass_ = ratio > 1.0 ? 1.0 - 1.0 / ratio : 0.0;
    } else {
        scale_ = 1.0 / (2.0 * std::numbers::pi);
        point_mass_ = ratio < 1.0 ? 1.0 - ratio : 0.0;
    }
}

double MPDensity::pdf(double lambda) const noexcept {
    if (lambda <= a_ || lambda >= b_ || lambda <= 0.0) return 0.0;
    return scale_ * std::sqrt((lambda - a_) * (b_ - lambda)) / lambda;
}

namespace {

double integrate_theta(const MPDensity& g, const std::function<double(double, double)>& f, double theta_max) {
    if (theta_max <= 0.0) return 0.0;
    const double a = g.a(), w = g.b() - g.a();
    // With c = cos(theta/2), s = sin(theta/2):
    //   lambda = a + w c^2,  sqrt((lambda-a)(b-lambda)) = w c s,  dlambda = -w c s dtheta.
    // Near lambda = 0 (only when a = 0) the 1/lambda factor cancels one c^2.
    auto integrand = [&](double theta) {
        const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
        const double lambda = a + w * c * c;
        const double weight = a > 0.0 ? w * w * c * c * s * s / lambda : w * s * s;
        return f(lambda, w * s * s) * weight;
    };
    double err = 0.0;
    const double val = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, 0.0, theta_max, 20, 1e-13, &err);
    if (!std::isfinite(val) || err > kQuadratureTolerance)
        throw SolverError("mp_integrate: tolerance not reached (error estimate " + std::to_string(err) + ")");
    return val;
}

}  // namespace

double mp_integrate_tail(const MPDensity& g, const std::function<double(double)>& f, double lower) {
    const double lo = std::clamp(lower, g.a(), g.b());
    const double c2 = (lo - g.a()) / (g.b() - g.a());
    const double theta_max = 2.0 * std::acos(std::sqrt(std::clamp(c2, 0.0, 1.0)));
    return g.prefactor() * integrate_theta(g, [&](double l, double) { return f(l); }, theta_max);
}

double mp_integrate(const MPDensity& g, const std::function<double(double)>& f) {
    double v = g.prefactor() * integrate_theta(g, [&](double l, double) { return f(l); }, std::numbers::pi);
    if (g.point_mass() > 0.0) v += g.point_mass() * f(0.0);
    return v;
}

double mp_integrate_edge(const MPDensity& g, const std::function<double(double, double)>& f) {
    double v = g.prefactor() * integrate_theta(g, f, std::numbers::pi);
    if (g.point_mass() > 0.0) v += g.point_mass() * f(0.0, g.b());
    return v;
}

}  // namespace rvq::asymptotics
