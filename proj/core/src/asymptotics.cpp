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

#include "rvq/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "rvq/errors.hpp"
#include "rvq/parallel.hpp"
#include "rvq/randmat.hpp"
#include "rvq/receivers.hpp"

namespace rvq::asymptotics {

namespace {

constexpr double kLn2 = std::numbers::ln2;

void require_positive(double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw InvalidArgument(std::string(name) + " must be finite and > 0");
}

void require_k_bar(double k_bar) {
    if (!(k_bar > 0.0) || k_bar > 1.0) throw InvalidArgument("k_bar must lie in (0, 1]");
}

// Bisection for a monotone f with a sign change on [lo, hi]; returns an
// endpoint directly when f vanishes there.
template <class F>
double bisect(F&& f, double lo, double hi, double tol, const char* who) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    double fhi = f(hi);
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw SolverError(std::string(who) + ": root is not bracketed");
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    if (hi - lo > tol) throw SolverError(std::string(who) + ": bisection did not converge");
    return 0.5 * (lo + hi);
}

// Neumaier-compensated sum in the given order.
double stable_sum(const std::vector<double>& xs) {
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        const double t = s + x;
        c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
        s = t;
    }
    return s + c;
}

struct MeanSd {
    double mean, sd;
};

MeanSd mean_sd(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    const double m = stable_sum(xs) / n;
    std::vector<double> dev(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) dev[i] = (xs[i] - m) * (xs[i] - m);
    const double var = xs.size() > 1 ? stable_sum(dev) / (n - 1.0) : 0.0;
    return {m, std::sqrt(var)};
}

}  // namespace

void LargeSystemParams::validate() const {
    require_positive(nr_bar, "nr_bar");
    require_k_bar(k_bar);
    if (!(b_bar >= 0.0)) throw InvalidArgument("b_bar must be >= 0");
    if (!(b_hat >= 0.0)) throw InvalidArgument("b_hat must be >= 0");
    require_positive(rho, "rho");
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// ---------------------------------------------------------------------------

double RateGap::nats() const {
    if (neg_inf_) throw std::logic_error("RateGap: value is minus infinity");
    return nats_;
}

RateGap miso_rate_gap(double b_bar) {
    if (!(b_bar >= 0.0)) throw InvalidArgument("miso_rate_gap: b_bar must be >= 0");
    if (b_bar == 0.0) return RateGap::minus_infinity();
    return RateGap::finite(std::log1p(-std::exp2(-b_bar)));
}

double b_star(double nr_bar) {
    require_positive(nr_bar, "nr_bar");
    const double s = std::sqrt(nr_bar);
    return (nr_bar * std::log(s / (1.0 + s)) + s) / kLn2;
}

double beam_gamma_fixed_point(double nr_bar, double b_bar) {
    require_positive(nr_bar, "nr_bar");
    if (!(b_bar >= 0.0)) throw InvalidArgument("beam_gamma: b_bar must be >= 0");
    const double r = nr_bar;
    // r ln(g) - g - (r ln r - r - b ln 2): zero at the root, decreasing in g >= r.
    const double rhs = r * std::log(r) - r - b_bar * kLn2;
    auto f = [&](double g) { return r * std::log(g) - g - rhs; };
    const double lo = r, hi = r + std::sqrt(r);
    if (f(hi) >= 0.0) return hi;
    return bisect(f, lo, hi, 1e-15 * std::max(1.0, hi), "beam_gamma");
}

double beam_gamma_closed_form(double nr_bar, double b_bar) {
    require_positive(nr_bar, "nr_bar");
    const double r = nr_bar, s = std::sqrt(r);
    const double e = 0.5 * r * std::log(r) - (r - 1.0) * std::log1p(s) + s - b_bar * kLn2;
    return (1.0 + s) * (1.0 + s) - std::exp(e);
}

double beam_gamma(double nr_bar, double b_bar) {
    require_positive(nr_bar, "nr_bar");
    if (!(b_bar >= 0.0)) throw InvalidArgument("beam_gamma: b_bar must be >= 0");
    if (b_bar == 0.0) return nr_bar;
    return b_bar <= b_star(nr_bar) ? beam_gamma_fixed_point(nr_bar, b_bar)
                                   : beam_gamma_closed_form(nr_bar, b_bar);
}

double rho_star(double gamma, double nr_bar) {
    require_positive(nr_bar, "nr_bar");
    const double s = std::sqrt(nr_bar), b = (1.0 + s) * (1.0 + s);
    if (!(gamma >= nr_bar) || !(gamma < b))
        throw InvalidArgument("rho_star: gamma must lie in [nr_bar, (1 + sqrt nr_bar)^2)");
    return gamma <= nr_bar + s ? (gamma - nr_bar) / gamma : 1.0 / (b - gamma);
}

double phi(double gamma, double rho, double nr_bar) {
    const MPDensity g(nr_bar, GramSide::transmit);
    if (!(gamma >= nr_bar) || !(gamma < g.b()))
        throw InvalidArgument("phi: gamma must lie in [nr_bar, (1 + sqrt nr_bar)^2)");
    if (!(rho >= 0.0) || rho > (1.0 + 1e-12) / (g.b() - gamma))
        throw InvalidArgument("phi: rho must lie in [0, 1/((1 + sqrt nr_bar)^2 - gamma)]");
    if (rho == 0.0) return 0.0;
    // 1 + rho (gamma - lambda) = c0 + rho (b - lambda); c0 vanishes at the
    // upper rho_star branch, so keep both parts non-negative.
    const double c0 = std::max(0.0, 1.0 - rho * (g.b() - gamma));
    return mp_integrate_edge(g, [&](double, double to_edge) { return std::log(c0 + rho * to_edge); });
}

double theta(double x, double nr_bar) {
    require_positive(nr_bar, "nr_bar");
    const double s = std::sqrt(nr_bar), b = (1.0 + s) * (1.0 + s);
    if (!(x > b)) throw InvalidArgument("theta: x must exceed (1 + sqrt nr_bar)^2");
    const double d = x - 1.0 - nr_bar;
    const double root = std::sqrt(d * d - 4.0 * nr_bar);
    const double w = 0.5 * (d + root);
    const double u = (d - root) / (2.0 * s);
    return std::log(w) + s * u - (nr_bar - 1.0) * std::log1p(u / s);
}

BeamGainCheck verify_beam_gain(double nr_bar, double b_bar) {
    require_positive(nr_bar, "nr_bar");
    if (!(b_bar >= 0.0)) throw InvalidArgument("verify_beam_gain: b_bar must be >= 0");
    BeamGainCheck out;
    out.gamma_closed = beam_gamma(nr_bar, b_bar);
    const double target = b_bar * kLn2;
    const double b = (1.0 + std::sqrt(nr_bar)) * (1.0 + std::sqrt(nr_bar));
    auto f = [&](double gamma) { return phi(gamma, rho_star(gamma, nr_bar), nr_bar) - target; };
    const double hi = b - 1e-9 * b;
    if (b_bar == 0.0) {
        out.gamma_quadrature = nr_bar;
    } else {
        if (f(hi) < 0.0) throw SolverError("verify_beam_gain: b_bar beyond the bracketed range");
        out.gamma_quadrature = bisect(f, nr_bar, hi, 1e-12, "verify_beam_gain");
    }
    out.residual = std::abs(out.gamma_quadrature - out.gamma_closed);
    return out;
}

// ---------------------------------------------------------------------------

double cap_no_feedback(double nr_bar, double rho) {
    require_positive(nr_bar, "nr_bar");
    require_positive(rho, "rho");
    if (nr_bar > 1.0)
        throw UnsupportedRegime(
            "cap_no_feedback: stated for nr_bar <= 1; use cap_no_feedback_dual (swap N_t and N_r, "
            "scale rho by nr_bar)");
    const double r = nr_bar;
    const double t = 1.0 + r + 1.0 / rho;
    const double disc = std::sqrt(t * t - 4.0 * r);
    // z = 2r / (t + disc) avoids cancellation at low SNR
    const double z = 2.0 * r / (t + disc);
    // ln(rho y) with rho y = (u + sqrt(u^2 - 4 r rho^2)) / 2 and u = 1 + (1 + r) rho,
    // written as log1p so that it keeps full precision as rho -> 0
    const double e = (1.0 + r) * rho;
    const double root = std::sqrt((1.0 + e) * (1.0 + e) - 4.0 * r * rho * rho);
    const double root_minus_one = (e * (2.0 + e) - 4.0 * r * rho * rho) / (root + 1.0);
    const double ln_rho_y = std::log1p(0.5 * (e + root_minus_one));
    return ln_rho_y - ((1.0 - r) / r) * std::log1p(-z) - z / r;
}

double cap_no_feedback_dual(double nr_bar, double rho) {
    require_positive(nr_bar, "nr_bar");
    if (nr_bar <= 1.0) return cap_no_feedback(nr_bar, rho);
    return cap_no_feedback(1.0 / nr_bar, rho * nr_bar) / nr_bar;
}

FullFeedback full_feedback(double nr_bar, double k_bar, double rho) {
    require_positive(nr_bar, "nr_bar");
    require_k_bar(k_bar);
    require_positive(rho, "rho");
    if (nr_bar > 1.0) {
        FullFeedback d = full_feedback(1.0 / nr_bar, k_bar / nr_bar, rho);
        d.capacity /= nr_bar;
        return d;
    }
    const MPDensity g(nr_bar, GramSide::receive);
    const double target = std::min(1.0, k_bar / nr_bar);
    FullFeedback out;
    if (target >= 1.0) {
        out.eta = g.a();
    } else {
        auto mass = [&](double eta) {
            return mp_integrate_tail(g, [](double) { return 1.0; }, eta) - target;
        };
        out.eta = bisect(mass, g.a(), g.b(), 1e-10, "cap_full_feedback");
    }
    out.capacity = mp_integrate_tail(g, [&](double l) { return std::log1p(rho / k_bar * l); }, out.eta);
    return out;
}

double cap_full_feedback(double nr_bar, double k_bar, double rho) {
    return full_feedback(nr_bar, k_bar, rho).capacity;
}

RankOptimum optimal_rank(double nr_bar, double rho) {
    require_positive(nr_bar, "nr_bar");
    require_positive(rho, "rho");
    constexpr int kGrid = 20;
    std::vector<double> ks, cs;
    for (int i = 1; i <= kGrid; ++i) {
        ks.push_back(static_cast<double>(i) / kGrid);
        cs.push_back(cap_full_feedback(nr_bar, ks.back(), rho));
    }
    const auto best = static_cast<std::size_t>(std::max_element(cs.begin(), cs.end()) - cs.begin());
    RankOptimum opt{ks[best], cs[best]};

    double lo = best == 0 ? 1e-4 : ks[best - 1];
    double hi = best + 1 == ks.size() ? 1.0 : ks[best + 1];
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
    double f1 = cap_full_feedback(nr_bar, x1, rho), f2 = cap_full_feedback(nr_bar, x2, rho);
    while (hi - lo > 1e-7) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = cap_full_feedback(nr_bar, x2, rho);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = cap_full_feedback(nr_bar, x1, rho);
        }
    }
    const double xm = 0.5 * (lo + hi);
    const double fm = cap_full_feedback(nr_bar, xm, rho);
    if (fm > opt.capacity) opt = {xm, fm};
    return opt;
}

double rate_ratio(double nr_bar, double rho) {
    return optimal_rank(nr_bar, rho).capacity / cap_no_feedback_dual(nr_bar, rho);
}

// ---------------------------------------------------------------------------

double mu_j(double nr_bar, double k_bar, double rho) {
    require_positive(nr_bar, "nr_bar");
    require_k_bar(k_bar);
    require_positive(rho, "rho");
    const double c = k_bar / nr_bar;
    const double t = 1.0 + c + c / rho;
    const double v = 2.0 * c / (t + std::sqrt(t * t - 4.0 * c));
    return c * std::log1p(rho * (1.0 - v) / c) + std::log1p(rho - rho * v / c) - v;
}

LowSnrVariance sigma_lowsnr(double nr_bar, double rho) {
    require_positive(nr_bar, "nr_bar");
    require_positive(rho, "rho");
    if (nr_bar > 1.0) throw UnsupportedRegime("sigma_lowsnr: stated for nr_bar <= 1");
    return {rho * rho * (1.0 - nr_bar), rho <= std::pow(10.0, -0.5) * (1.0 + 1e-12)};
}

double mf_sinr(double nr_bar, double k_bar, double sigma_n2) {
    require_positive(nr_bar, "nr_bar");
    require_k_bar(k_bar);
    require_positive(sigma_n2, "sigma_n2");
    return nr_bar / (k_bar * (1.0 + sigma_n2));
}

double mmse_sinr(double nr_bar, double k_bar, double sigma_n2) {
    require_positive(nr_bar, "nr_bar");
    require_k_bar(k_bar);
    require_positive(sigma_n2, "sigma_n2");
    // Each stream's effective channel carries N_r while the noise floor is
    // K sigma^2, so the load-c quadratic runs at noise c sigma^2.
    const double c = k_bar / nr_bar;
    const double s = c * sigma_n2;
    // positive root of x^2 - 2 q x - 1/s = 0
    const double q = (1.0 - c) / (2.0 * s) - 0.5;
    const double root = std::sqrt(q * q + 1.0 / s);
    return q >= 0.0 ? q + root : (1.0 / s) / (root - q);
}

double mf_mu(double nr_bar, double k_bar, double sigma_n2) {
    return (k_bar / nr_bar) * std::log1p(mf_sinr(nr_bar, k_bar, sigma_n2));
}

double mmse_mu(double nr_bar, double k_bar, double sigma_n2) {
    return (k_bar / nr_bar) * std::log1p(mmse_sinr(nr_bar, k_bar, sigma_n2));
}

std::string_view to_string(Receiver r) noexcept {
    switch (r) {
        case Receiver::optimal: return "optimal";
        case Receiver::mf: return "mf";
        case Receiver::mmse: return "mmse";
    }
    return "?";
}

GaussianRateModel closed_form_model(Receiver receiver, double nr_bar, double k_bar, double rho,
                                    double sigma2) {
    if (!(sigma2 >= 0.0)) throw InvalidArgument("closed_form_model: sigma2 must be >= 0");
    GaussianRateModel m;
    m.receiver = receiver;
    m.sigma2 = sigma2;
    switch (receiver) {
        case Receiver::optimal: m.mu = mu_j(nr_bar, k_bar, rho); break;
        case Receiver::mf: m.mu = mf_mu(nr_bar, k_bar, 1.0 / rho); break;
        case Receiver::mmse: m.mu = mmse_mu(nr_bar, k_bar, 1.0 / rho); break;
    }
    return m;
}

std::array<GaussianRateModel, 3> estimate_sigma_all(double nr_bar, double k_bar, double rho,
                                                    SeedPolicy seed, const SigmaOptions& opts) {
    require_positive(nr_bar, "nr_bar");
    require_k_bar(k_bar);
    require_positive(rho, "rho");
    if (opts.trials < 1000) throw InvalidArgument("estimate_sigma: need at least 1000 trials");
    if (opts.precoders_per_channel < 2)
        throw InvalidArgument("estimate_sigma: need at least 2 precoders per channel");
    if (opts.n_t < 1) throw InvalidArgument("estimate_sigma: n_t must be >= 1");
    const int n_t = opts.n_t;
    const int n_r = std::max(1, static_cast<int>(std::lround(nr_bar * n_t)));
    const int k = std::clamp(static_cast<int>(std::lround(k_bar * n_t)), 1, n_t);
    const randmat::SystemDims dims(n_t, n_r, k);
    const auto trials = static_cast<std::size_t>(opts.trials);
    const int P = opts.precoders_per_channel;

    // per-trial, per-receiver conditional variance and mean
    std::array<std::vector<double>, 3> var, mean;
    for (int r = 0; r < 3; ++r) {
        var[r].assign(trials, 0.0);
        mean[r].assign(trials, 0.0);
    }
    parallel_for(trials, opts.threads, [&](std::size_t t) {
        const auto trial = static_cast<std::uint32_t>(t);
        auto hs = seed.stream(trial, StreamLabel::channel);
        const auto h = randmat::sample_channel(dims, hs);
        std::array<double, 3> m{}, m2{};
        std::vector<double> sinr;
        for (int p = 0; p < P; ++p) {
            auto vs = seed.stream(trial, StreamLabel::precoder, static_cast<std::uint32_t>(p));
            const auto v = randmat::sample_semi_unitary(n_t, k, vs);
            const randmat::CMatrix g = h.matrix() * v.matrix();
            const randmat::CMatrix q = g.adjoint() * g;
            std::array<double, 3> x{};
            x[0] = receivers::optimal_rate_from_gram(q, n_r, rho);
            receivers::mf_sinr_from_gram(q, 1.0 / rho, sinr);
            x[1] = receivers::sum_rate_from_sinrs(sinr, n_r);
            receivers::mmse_sinr_from_gram(q, 1.0 / rho, sinr);
            x[2] = receivers::sum_rate_from_sinrs(sinr, n_r);
            // Welford update
            for (int r = 0; r < 3; ++r) {
                const double d = x[r] - m[r];
                m[r] += d / (p + 1);
                m2[r] += d * (x[r] - m[r]);
            }
        }
        for (int r = 0; r < 3; ++r) {
            mean[r][t] = m[r];
            var[r][t] = m2[r] / (P - 1);
        }
    });

    std::array<GaussianRateModel, 3> out;
    const Receiver kinds[3] = {Receiver::optimal, Receiver::mf, Receiver::mmse};
    const double nr2 = static_cast<double>(n_r) * n_r;
    const double sqrt_t = std::sqrt(static_cast<double>(trials));
    for (int r = 0; r < 3; ++r) {
        const MeanSd v = mean_sd(var[r]);
        const MeanSd mu = mean_sd(mean[r]);
        GaussianRateModel& m = out[static_cast<std::size_t>(r)];
        m = closed_form_model(kinds[r], nr_bar, k_bar, rho, nr2 * v.mean);
        m.sigma2_stderr = nr2 * v.sd / sqrt_t;
        m.sample_mean = mu.mean;
        m.sample_mean_stderr = mu.sd / sqrt_t;
        m.provenance = {Provenance::Kind::monte_carlo, seed.master_seed(), n_t, opts.trials, P};
    }
    return out;
}

GaussianRateModel estimate_sigma(Receiver receiver, double nr_bar, double k_bar, double rho,
                                 SeedPolicy seed, const SigmaOptions& opts) {
    auto all = estimate_sigma_all(nr_bar, k_bar, rho, seed, opts);
    return all[static_cast<std::size_t>(receiver)];
}

double gaussian_rate(const GaussianRateModel& model, double b_hat, double cap) {
    if (!(b_hat >= 0.0)) throw InvalidArgument("gaussian_rate: b_hat must be >= 0");
    if (!(model.sigma2 >= 0.0)) throw InvalidArgument("gaussian_rate: sigma2 must be >= 0");
    // cap and mu coincide analytically at k_bar = 1; allow rounding there.
    if (cap < model.mu - 1e-9 * std::max(1.0, std::abs(model.mu)))
        throw InvalidArgument("gaussian_rate: cap must be >= mu");
    return std::min(model.mu + std::sqrt(model.sigma2 * 2.0 * b_hat * kLn2), cap);
}

double bhat_to_reach_cap(const GaussianRateModel& model, double cap) {
    if (cap < model.mu - 1e-9 * std::max(1.0, std::abs(model.mu)))
        throw InvalidArgument("bhat_to_reach_cap: cap must be >= mu");
    if (cap <= model.mu) return 0.0;
    if (model.sigma2 <= 0.0) return std::numeric_limits<double>::infinity();
    const double d = cap - model.mu;
    return d * d / (model.sigma2 * 2.0 * kLn2);
}

}  // namespace rvq::asymptotics
