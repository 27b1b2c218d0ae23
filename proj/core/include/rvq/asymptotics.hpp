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

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "rvq/marchenko_pastur.hpp"
#include "rvq/rng.hpp"

namespace rvq::asymptotics {

/// Large-system ratios. Which of b_bar / b_hat is read depends on the call.
struct LargeSystemParams {
    double nr_bar = 1.0;
    double k_bar = 1.0;
    double b_bar = 0.0;
    double b_hat = 0.0;
    double rho = 1.0;

    double sigma_n2() const { return 1.0 / rho; }
    /// Throws InvalidArgument on any violated range.
    void validate() const;
};

double db_to_linear(double db);

// ---- MISO beamforming -----------------------------------------------------

/// ln(1 - 2^-b_bar), with b_bar = 0 represented as a tagged minus infinity.
class RateGap {
public:
    static RateGap finite(double nats) { return RateGap(false, nats); }
    static RateGap minus_infinity() { return RateGap(true, 0.0); }

    bool is_minus_infinity() const noexcept { return neg_inf_; }
    /// Throws std::logic_error for the minus-infinity tag.
    double nats() const;
    double value_or(double fallback) const noexcept { return neg_inf_ ? fallback : nats_; }

private:
    RateGap(bool neg_inf, double nats) : neg_inf_(neg_inf), nats_(nats) {}
    bool neg_inf_;
    double nats_;
};

RateGap miso_rate_gap(double b_bar);

// ---- MIMO beamforming -----------------------------------------------------

/// Feedback level at which the beamforming gain switches from the
/// fixed-point branch to the closed-form branch.
double b_star(double nr_bar);

/// Root of gamma^r e^-gamma = 2^-b_bar (r/e)^r on [r, r + sqrt r].
/// Only meaningful for b_bar <= b_star(r); larger b_bar clamps to r + sqrt r.
double beam_gamma_fixed_point(double nr_bar, double b_bar);

/// (1 + sqrt r)^2 - exp(r/2 ln r - (r - 1) ln(1 + sqrt r) + sqrt r - b_bar ln 2).
double beam_gamma_closed_form(double nr_bar, double b_bar);

/// Asymptotic received power of the selected beam, in [r, (1 + sqrt r)^2].
double beam_gamma(double nr_bar, double b_bar);

/// Integral of ln(1 + rho (gamma - lambda)) over the transmit-side law.
double phi(double gamma, double rho, double nr_bar);
double rho_star(double gamma, double nr_bar);
/// Closed form of the integral of ln(x - lambda) over the transmit-side law,
/// for x > (1 + sqrt r)^2.
double theta(double x, double nr_bar);

struct BeamGainCheck {
    double gamma_quadrature = 0.0;
    double gamma_closed = 0.0;
    double residual = 0.0;
};

/// Solves phi(gamma, rho_star(gamma)) = b_bar ln 2 by bisection with
/// quadrature phi and compares with beam_gamma.
BeamGainCheck verify_beam_gain(double nr_bar, double b_bar);

// ---- Rank-K precoding capacities ------------------------------------------

/// Zero-feedback capacity per receive antenna. Throws UnsupportedRegime for
/// nr_bar > 1; cap_no_feedback_dual handles that case.
double cap_no_feedback(double nr_bar, double rho);

/// Any nr_bar > 0, via C(r, rho) = C(1/r, r rho) / r for r > 1.
double cap_no_feedback_dual(double nr_bar, double rho);

struct FullFeedback {
    double eta = 0.0;
    double capacity = 0.0;
};

/// Infinite-feedback on-off capacity with K = k_bar N_t active modes.
/// nr_bar > 1 is served through C(r, k, rho) = C(1/r, k/r, rho) / r.
FullFeedback full_feedback(double nr_bar, double k_bar, double rho);
double cap_full_feedback(double nr_bar, double k_bar, double rho);

struct RankOptimum {
    double k_bar = 1.0;
    double capacity = 0.0;
};

RankOptimum optimal_rank(double nr_bar, double rho);

double rate_ratio(double nr_bar, double rho);

// ---- Random-precoder statistics -------------------------------------------

/// Asymptotic mean of J, the rate of an isotropic rank-K precoder.
double mu_j(double nr_bar, double k_bar, double rho);

struct LowSnrVariance {
    double sigma2 = 0.0;
    /// false when rho > 10^-0.5, where the series is no longer reliable
    bool in_validity_range = true;
};

/// rho^2 (1 - nr_bar), stated for k_bar = nr_bar <= 1 at low SNR.
LowSnrVariance sigma_lowsnr(double nr_bar, double rho);

/// Large-system per-stream SINRs and mean rates of the linear receivers.
double mf_sinr(double nr_bar, double k_bar, double sigma_n2);
double mmse_sinr(double nr_bar, double k_bar, double sigma_n2);
double mf_mu(double nr_bar, double k_bar, double sigma_n2);
double mmse_mu(double nr_bar, double k_bar, double sigma_n2);

enum class Receiver { optimal, mf, mmse };
std::string_view to_string(Receiver r) noexcept;

struct Provenance {
    enum class Kind { closed_form, monte_carlo } kind = Kind::closed_form;
    std::uint64_t seed = 0;
    int n_t = 0;
    int trials = 0;
    int precoders_per_channel = 0;
};

struct GaussianRateModel {
    double mu = 0.0;
    double sigma2 = 0.0;
    Receiver receiver = Receiver::optimal;
    Provenance provenance;
    double sigma2_stderr = 0.0;
    /// Finite-size Monte Carlo mean of the rate and its standard error
    /// (per-channel means), reported next to the asymptotic mu.
    std::optional<double> sample_mean;
    double sample_mean_stderr = 0.0;
};

struct SigmaOptions {
    int n_t = 64;
    int trials = 4000;
    int precoders_per_channel = 16;
    int threads = 1;
};

/// Variance of N_r^2 J across random precoders for a fixed channel, pooled
/// over `trials` channels. All three receivers are scored on the same draws.
/// Throws InvalidArgument for trials < 1000.
std::array<GaussianRateModel, 3> estimate_sigma_all(double nr_bar, double k_bar, double rho,
                                                    SeedPolicy seed, const SigmaOptions& opts = {});

GaussianRateModel estimate_sigma(Receiver receiver, double nr_bar, double k_bar, double rho,
                                 SeedPolicy seed, const SigmaOptions& opts = {});

/// Closed-form model: mu from the matching formula, sigma2 supplied.
GaussianRateModel closed_form_model(Receiver receiver, double nr_bar, double k_bar, double rho,
                                    double sigma2);

/// min(mu + sigma sqrt(2 b_hat ln 2), cap). Throws InvalidArgument if cap < mu.
double gaussian_rate(const GaussianRateModel& model, double b_hat, double cap);

/// Smallest b_hat at which gaussian_rate reaches cap.
double bhat_to_reach_cap(const GaussianRateModel& model, double cap);

}  // namespace rvq::asymptotics
