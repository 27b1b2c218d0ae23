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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rvq/asymptotics.hpp"
#include "rvq/harness.hpp"
#include "rvq/presets.hpp"
#include "rvq/quantizer.hpp"
#include "rvq/receivers.hpp"
#include "rvq/report.hpp"

using namespace rvq;
namespace asy = rvq::asymptotics;
namespace h = rvq::harness;
namespace qz = rvq::quantizer;

namespace {

constexpr std::uint64_t kSeed = 20260101;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

class Clock {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double x, const char* spec = "%.4g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

// ---------------------------------------------------------------------------

void c1(Outcome& o) {
    const Clock clock;
    auto cfg = h::make_preset(h::Preset::fig2, kSeed, {.trials = 2000});
    cfg.series[0].grid = {0.5, 1.0, 1.5, 2.0};
    const auto r = h::run_experiment(cfg);
    o.require(r.complete, "run incomplete: " + r.failure);
    for (const auto& row : r.series.at(0).rows) {
        const double dev = std::abs(*row.sim_mean - *row.asymptotic);
        o.detail << " B=" << fmt(row.sweep) << ":dev=" << fmt(dev, "%.3f");
        o.require(dev <= 0.15, "deviation " + fmt(dev, "%.3f") + " > 0.15 at B=" + fmt(row.sweep));
    }
    const double t = clock.seconds();
    o.detail << " time=" << fmt(t, "%.1f") << "s";
    o.require(t < 120.0, "runtime");
}

void c2(Outcome& o) {
    const Clock clock;
    double worst = 0.0;
    for (double r : {0.25, 0.5, 1.0, 1.5}) {
        const double bs = asy::b_star(r);
        for (double b : {0.1, bs / 2, bs, 2 * bs}) worst = std::max(worst, asy::verify_beam_gain(r, b).residual);
    }
    double jump = 0.0;
    for (double r : {0.25, 0.5, 1.0, 1.5}) {
        const double bs = asy::b_star(r);
        jump = std::max(jump, std::abs(asy::beam_gamma_fixed_point(r, bs) - asy::beam_gamma_closed_form(r, bs)));
    }
    const double miso = std::abs(asy::beam_gamma(1e-6, 1.0) - 0.5);
    const double t = clock.seconds();
    o.detail << " residual=" << fmt(worst, "%.2e") << " branch_gap=" << fmt(jump, "%.2e")
             << " miso=" << fmt(miso, "%.2e") << " time=" << fmt(t, "%.2f") << "s";
    o.require(worst < 1e-6, "residual");
    o.require(jump < 1e-8, "continuity");
    o.require(miso < 5e-3, "MISO limit");
    o.require(t < 10.0, "runtime");
}

void c3(Outcome& o) {
    const Clock clock;
    auto cfg = h::make_preset(h::Preset::fig3, kSeed, {.trials = 200});
    std::erase_if(cfg.series, [](const h::SeriesSpec& s) { return s.rho_db != 10.0; });
    cfg.series.at(0).grid = {0.5, 1.0};
    const auto r = h::run_experiment(cfg);
    o.require(r.complete, "run incomplete: " + r.failure);
    for (const auto& row : r.series.at(0).rows) {
        const double dev = std::abs(*row.sim_mean - *row.asymptotic);
        o.detail << " B=" << fmt(row.sweep) << ":dev=" << fmt(dev, "%.3f");
        o.require(dev <= 0.15, "deviation at B=" + fmt(row.sweep));
    }
    const double t = clock.seconds();
    o.detail << " time=" << fmt(t, "%.1f") << "s";
    o.require(t < 600.0, "runtime");
}

void c4(Outcome& o) {
    const double c = asy::cap_no_feedback(1.0, 10.0);
    const double q = asy::mp_integrate(asy::MPDensity(1.0, randmat::GramSide::receive),
                                       [](double l) { return std::log1p(10.0 * l); });
    const randmat::SystemDims d(64, 64);
    double mc = 0.0;
    const int n = 200;
    for (int t = 0; t < n; ++t) {
        auto rng = SeedPolicy(kSeed).stream(static_cast<std::uint32_t>(t), StreamLabel::channel);
        mc += receivers::mutual_info_optimal(randmat::sample_channel(d, rng), randmat::CMatrix::Identity(64, 64), 10.0).nats;
    }
    mc /= n;
    double ident = 0.0;
    for (double r : {0.2, 0.4, 0.6, 0.8, 1.0}) ident = std::max(ident, std::abs(asy::mu_j(r, 1.0, 3.0) - asy::cap_no_feedback(r, 3.0)));
    o.detail << " cap=" << fmt(c, "%.6f") << " quad=" << fmt(q, "%.6f") << " mc64=" << fmt(mc, "%.5f")
             << " identity=" << fmt(ident, "%.1e");
    o.require(std::abs(c - 1.8877) <= 1e-4 && std::abs(c - q) <= 1e-4, "closed form");
    o.require(std::abs(mc - c) <= 0.01 * c, "Monte Carlo");
    o.require(ident <= 1e-9, "mu_j identity");
}

void c5(Outcome& o) {
    const double hi = asy::rate_ratio(1.0, asy::db_to_linear(30.0));
    o.detail << " ratio(30dB,1)=" << fmt(hi, "%.4f");
    o.require(std::abs(hi - 1.0) <= 0.1, "high-SNR limit");
    for (double r : {0.2, 0.5, 1.0}) {
        const double lo = asy::rate_ratio(r, asy::db_to_linear(-20.0));
        const double bound = (1 + 1 / std::sqrt(r)) * (1 + 1 / std::sqrt(r));
        o.detail << " ratio(-20dB," << r << ")=" << fmt(lo, "%.4f") << "<=" << fmt(bound, "%.4f");
        o.require(lo <= bound, "low-SNR bound");
    }
}

void c6(Outcome& o) {
    const Clock clock;
    auto cfg = h::make_preset(h::Preset::fig5, kSeed, {.trials = 2000});
    for (auto& s : cfg.series) s.grid = {0.2, 0.4};
    const auto r = h::run_experiment(cfg);
    o.require(r.complete, "run incomplete: " + r.failure);
    for (const auto& s : r.series) {
        for (const auto& row : s.rows) {
            const double dev = std::abs(*row.sim_mean - *row.asymptotic) / *row.asymptotic;
            o.detail << " " << s.name << "@" << fmt(row.sweep) << "(B=" << row.b_used << "):" << fmt(100 * dev, "%.1f") << "%";
            o.require(dev <= 0.05, s.name + " at " + fmt(row.sweep));
        }
    }
    const double t = clock.seconds();
    o.detail << " time=" << fmt(t, "%.0f") << "s";
    o.require(t < 900.0, "runtime");
}

void c7(Outcome& o) {
    const auto r = h::run_experiment(h::make_preset(h::Preset::fig6, kSeed));
    o.require(r.complete, "run incomplete: " + r.failure);
    const double want[] = {1.0, 0.30, 0.20};
    const double tol[] = {1e-9, 0.05 + 1e-9, 0.05 + 1e-9};
    for (std::size_t i = 0; i < 3 && i < r.series.size(); ++i) {
        const double k = r.series[i].extras.at("argmax_k_bar");
        o.detail << " " << r.series[i].name << ":k*=" << fmt(k, "%.2f");
        o.require(std::abs(k - want[i]) <= tol[i], r.series[i].name);
    }
}

void c8(Outcome& o) {
    const Clock clock;
    auto cfg = h::make_preset(h::Preset::fig8, kSeed, {.trials = 100});
    std::erase_if(cfg.series, [](const h::SeriesSpec& s) { return s.kind != h::SeriesKind::rvq_rate; });
    h::SeriesSpec mmse = cfg.series.at(0);
    mmse.name = "rvq_mmse";
    mmse.receiver = asy::Receiver::mmse;
    cfg.series.push_back(mmse);
    const auto r = h::run_experiment(cfg);
    o.require(r.complete, "run incomplete: " + r.failure);
    double cross[3] = {0, 0, 0};  // mf, optimal, mmse
    for (std::size_t i = 0; i < r.series.size() && i < 3; ++i) {
        const auto& s = r.series[i];
        cross[i] = s.extras.at("bhat_to_cap");
        o.detail << " " << s.name << ":cross=" << fmt(cross[i], "%.3f") << " dev=";
        for (const auto& row : s.rows) {
            if (row.sweep > 0.5) continue;
            const double dev = std::abs(*row.sim_mean - *row.asymptotic) / *row.asymptotic;
            o.detail << fmt(100 * dev, "%.1f") << "%,";
            o.require(dev <= 0.05, s.name + " sim at " + fmt(row.sweep, "%.3f"));
        }
    }
    o.require(std::abs(cross[0] - 1.2) <= 0.2, "MF crossing " + fmt(cross[0], "%.3f") + " not in 1.2 +- 0.2");
    o.require(std::abs(cross[1] - 0.6) <= 0.2, "optimal crossing");
    o.require(cross[2] > cross[1] && cross[2] < cross[0], "MMSE crossing ordering");
    o.detail << " time=" << fmt(clock.seconds(), "%.0f") << "s";
}

void c9(Outcome& o) {
    const SeedPolicy seed(kSeed);
    // unitarity and norms
    double worst = 0.0;
    for (std::uint32_t t = 0; t < 10000; ++t) {
        auto rng = seed.stream(t, StreamLabel::precoder);
        const int n = 2 + static_cast<int>(t % 15);
        const int k = 1 + static_cast<int>(t % static_cast<std::uint32_t>(n));
        worst = std::max(worst, randmat::sample_semi_unitary(n, k, rng).unitarity_error());
        auto ri = seed.stream(t, StreamLabel::isotropic);
        worst = std::max(worst, std::abs(randmat::sample_isotropic_unit_vector(n, ri).norm() - 1.0));
    }
    o.detail << " unitarity=" << fmt(worst, "%.1e");
    o.require(worst < 1e-12, "unitarity");

    // projection law
    for (int n : {2, 4, 8}) {
        randmat::CVector u = randmat::CVector::Zero(n);
        u(n - 1) = 1.0;
        std::vector<double> y;
        for (std::uint32_t t = 0; t < 10000; ++t) {
            auto rng = seed.stream(t, StreamLabel::isotropic, static_cast<std::uint32_t>(n));
            y.push_back(std::norm(randmat::sample_isotropic_unit_vector(n, rng).dot(u)));
        }
        const double p = oracle::ks_pvalue(
            oracle::ks_statistic(y, [n](double v) { return 1 - std::pow(1 - v, n - 1); }), 10000);
        o.detail << " ks" << n << "=" << fmt(p, "%.2f");
        o.require(p > 0.01, "KS at n_t=" + std::to_string(n));
    }

    // receivers
    int bad_order = 0, bad_bound = 0;
    for (std::uint32_t t = 0; t < 1000; ++t) {
        const int n_t = 2 + static_cast<int>(t % 7), n_r = 1 + static_cast<int>(t % 6);
        const int k = 1 + static_cast<int>(t % static_cast<std::uint32_t>(n_t));
        auto rh = seed.stream(t, StreamLabel::channel);
        auto rv = seed.stream(t, StreamLabel::precoder, 1);
        const auto hm = randmat::sample_channel(randmat::SystemDims(n_t, n_r), rh);
        const auto v = randmat::sample_semi_unitary(n_t, k, rv).matrix();
        const double rho = std::pow(10.0, static_cast<double>(t % 7) / 2.0 - 1.5);
        const auto mf = receivers::linear_sinr(hm, v, 1 / rho, receivers::LinearKind::mf);
        const auto mm = receivers::linear_sinr(hm, v, 1 / rho, receivers::LinearKind::mmse);
        for (int i = 0; i < k; ++i) bad_order += mm.per_stream[i] < mf.per_stream[i] - 1e-12;
        bad_bound += receivers::sum_rate(mm, n_r).nats > receivers::mutual_info_optimal(hm, v, rho).nats + 1e-10;
    }
    o.detail << " mmse<mf=" << bad_order << " mmse>opt=" << bad_bound;
    o.require(bad_order == 0 && bad_bound == 0, "receiver ordering");

    // water filling
    int bad_wf = 0;
    auto rw = seed.stream(0, StreamLabel::test, 1);
    for (int t = 0; t < 1000; ++t) {
        const int n = 1 + t % 6;
        std::vector<double> ev(n);
        for (double& e : ev) e = 4.0 * rw.uniform();
        const double rho = std::pow(10.0, 3.0 * rw.uniform() - 1.5);
        const double c = receivers::water_filling(ev, rho, n).capacity.nats;
        for (int mask = 1; mask < (1 << n); ++mask) {
            const int kk = __builtin_popcount(static_cast<unsigned>(mask));
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                if (mask & (1 << i)) s += std::log1p(rho * ev[i] / kk);
            bad_wf += c < s / n - 1e-12;
        }
    }
    o.detail << " wf_violations=" << bad_wf;
    o.require(bad_wf == 0, "water filling dominance");

    // nested codebooks
    int bad_nest = 0;
    const qz::Metric ms[] = {qz::Metric::optimal, qz::Metric::mf, qz::Metric::mmse};
    const std::vector<std::size_t> sizes{1, 2, 4, 8, 16, 32, 64, 128};
    for (std::uint32_t t = 0; t < 100; ++t) {
        const qz::RvqCodebookStream cb(6, 3, 7, seed, t);
        auto rh = seed.stream(t, StreamLabel::channel, 2);
        const auto hm = randmat::sample_channel(randmat::SystemDims(6, 4), rh);
        const auto nested = qz::select_nested(hm, cb, 2.0, ms, sizes);
        for (std::size_t p = 1; p < sizes.size(); ++p)
            for (std::size_t m = 0; m < 3; ++m) bad_nest += nested[p][m].metric_value < nested[p - 1][m].metric_value;
    }
    o.detail << " nest_violations=" << bad_nest;
    o.require(bad_nest == 0, "nested monotonicity");

    // reproducibility
    auto cfg = h::make_preset(h::Preset::fig8, kSeed, {.trials = 6, .sigma_trials = 1000, .sigma_n_t = 16});
    auto render = [&](int threads) {
        const auto r = h::run_experiment(cfg, {.threads = threads});
        std::string s;
        for (const auto& sr : r.series) s += h::series_csv(sr, kSeed);
        return s;
    };
    const std::string a = render(1), b = render(1), c = render(4);
    o.detail << " rerun_identical=" << (a == b) << " threads_identical=" << (a == c);
    o.require(a == b, "rerun");
    o.require(a == c, "thread count");
}

void c10(Outcome& o) {
    const int n_t = 4, bits = 4;
    std::vector<randmat::ChannelMatrix> train;
    for (std::uint32_t t = 0; t < 10000; ++t) {
        auto rng = SeedPolicy(kSeed).stream(t, StreamLabel::training);
        train.push_back(randmat::sample_channel(randmat::SystemDims(n_t, 1), rng));
    }
    const auto lloyd = qz::lloyd_train(train, n_t, bits, 200, 1e-10, SeedPolicy(kSeed));
    auto mean_projection = [&](const qz::CodebookSource& cb) {
        const int n = 20000;
        double acc = 0.0;
        for (std::uint32_t t = 0; t < n; ++t) {
            auto rng = SeedPolicy(kSeed + 1).stream(t, StreamLabel::channel);
            const auto hm = randmat::sample_channel(randmat::SystemDims(n_t, 1), rng);
            acc += qz::select_entry(hm, cb, 1.0, qz::Metric::beam_power).metric_value * n_t / hm.matrix().squaredNorm();
        }
        return acc / n;
    };
    const double l = mean_projection(lloyd.codebook);
    double r = 0.0;
    for (std::uint32_t c = 0; c < 20; ++c) r += mean_projection(qz::RvqCodebookStream(n_t, 1, bits, SeedPolicy(kSeed + 2), c));
    r /= 20;
    const double rel = std::abs(l - r) / r;
    o.detail << " lloyd=" << fmt(l, "%.4f") << " rvq=" << fmt(r, "%.4f") << " rel=" << fmt(100 * rel, "%.2f")
             << "% iterations=" << lloyd.iterations;
    o.require(rel <= 0.02, "parity");
}

}  // namespace

int main() {
    struct Criterion {
        const char* id;
        const char* title;
        std::function<void(Outcome&)> run;
    };
    const Criterion criteria[] = {
        {"C1", "MISO rate gap vs simulation", c1},
        {"C2", "beamforming gain internal consistency", c2},
        {"C3", "MIMO beamforming vs simulation", c3},
        {"C4", "closed-form capacities", c4},
        {"C5", "rate-ratio limits", c5},
        {"C6", "Gaussian approximation vs simulation", c6},
        {"C7", "rank maximisers", c7},
        {"C8", "linear receivers", c8},
        {"C9", "property suites", c9},
        {"C10", "Lloyd parity", c10},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        failed += !o.pass;
        std::printf("%s %s %s:%s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
    return failed == 0 ? 0 : 1;
}
