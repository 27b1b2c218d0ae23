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

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rvq/asymptotics.hpp"
#include "rvq/errors.hpp"
#include "rvq/harness.hpp"
#include "rvq/presets.hpp"
#include "rvq/report.hpp"

namespace asy = rvq::asymptotics;
namespace hn = rvq::harness;

namespace {

constexpr int kExitTolerance = 2;
constexpr int kExitConfig = 3;

struct Global {
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out = "results";
    bool bits = false;
};

double to_units(double nats, bool bits) { return bits ? nats / std::numbers::ln2 : nats; }

int run_and_write(const hn::ExperimentConfig& cfg, const Global& g) {
    hn::RunOptions ro;
    ro.threads = g.threads;
    ro.progress = [](std::string_view msg) { std::cerr << "[rvqsim] " << msg << "\n"; };
    const auto result = hn::run_experiment(cfg, ro);
    const auto cmp = hn::compare(result);
    const auto paths = hn::write_outputs(result, cmp, g.out, {g.bits});
    for (const auto& p : paths) std::cout << p.string() << "\n";
    for (const auto& r : cmp.rows)
        if (std::isfinite(r.tolerance))
            std::printf("%-18s sweep=%-10.6g dev=%-10.4g tol=%-8.4g %s\n", r.series.c_str(), r.sweep, r.deviation,
                        r.tolerance, r.pass ? "ok" : "FAIL");
    if (!result.complete) {
        std::cerr << "run incomplete: " << result.failure << "\n";
        return 1;
    }
    return cmp.pass ? 0 : kExitTolerance;
}

int cmd_asymptotic(double nr_bar, double k_bar, double b_bar, double b_hat, double rho_db,
                   const std::string& receiver, double sigma2, const Global& g) {
    const double rho = asy::db_to_linear(rho_db);
    asy::LargeSystemParams p{nr_bar, k_bar, b_bar, b_hat, rho};
    p.validate();
    nlohmann::json j;
    j["inputs"] = {{"nr_bar", nr_bar}, {"k_bar", k_bar}, {"b_bar", b_bar}, {"b_hat", b_hat},
                   {"rho_db", rho_db}, {"rho", rho}, {"units", g.bits ? "bits" : "nats"}};
    const auto gap = asy::miso_rate_gap(b_bar);
    j["miso_rate_gap"] = gap.is_minus_infinity() ? nlohmann::json("-inf") : nlohmann::json(to_units(gap.nats(), g.bits));
    j["b_star"] = asy::b_star(nr_bar);
    j["beam_gamma"] = asy::beam_gamma(nr_bar, b_bar);
    j["cap_no_feedback"] = to_units(asy::cap_no_feedback_dual(nr_bar, rho), g.bits);
    const double cap = asy::cap_full_feedback(nr_bar, k_bar, rho);
    j["cap_full_feedback"] = to_units(cap, g.bits);
    const auto opt = asy::optimal_rank(nr_bar, rho);
    j["optimal_rank"] = {{"k_bar", opt.k_bar}, {"capacity", to_units(opt.capacity, g.bits)}};
    j["rate_ratio"] = asy::rate_ratio(nr_bar, rho);
    j["mu_j"] = to_units(asy::mu_j(nr_bar, k_bar, rho), g.bits);
    j["mf_mu"] = to_units(asy::mf_mu(nr_bar, k_bar, 1.0 / rho), g.bits);
    j["mmse_mu"] = to_units(asy::mmse_mu(nr_bar, k_bar, 1.0 / rho), g.bits);
    j["mmse_sinr"] = asy::mmse_sinr(nr_bar, k_bar, 1.0 / rho);
    if (nr_bar <= 1.0) {
        const auto low = asy::sigma_lowsnr(nr_bar, rho);
        j["sigma_lowsnr"] = {{"sigma2", low.sigma2}, {"in_validity_range", low.in_validity_range}};
    }
    if (sigma2 >= 0.0) {
        asy::Receiver r = receiver == "mf" ? asy::Receiver::mf
                          : receiver == "mmse" ? asy::Receiver::mmse
                                               : asy::Receiver::optimal;
        const auto m = asy::closed_form_model(r, nr_bar, k_bar, rho, sigma2);
        j["gaussian_rate"] = {{"receiver", receiver},
                              {"mu", to_units(m.mu, g.bits)},
                              {"rate", to_units(asy::gaussian_rate(m, b_hat, cap), g.bits)},
                              {"bhat_to_cap", asy::bhat_to_reach_cap(m, cap)}};
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_verify(const Global&) {
    bool ok = true;
    std::printf("%-8s %-12s %-14s %-14s %-10s\n", "nr_bar", "b_bar", "gamma_quad", "gamma_closed", "residual");
    for (double r : {0.25, 0.5, 1.0, 1.5}) {
        const double bs = asy::b_star(r);
        for (double b : {0.1, bs / 2, bs, 2 * bs}) {
            const auto c = asy::verify_beam_gain(r, b);
            const bool pass = c.residual < 1e-6;
            ok = ok && pass;
            std::printf("%-8g %-12.6g %-14.10g %-14.10g %-10.3g %s\n", r, b, c.gamma_quadrature, c.gamma_closed,
                        c.residual, pass ? "ok" : "FAIL");
        }
        const double jump = std::abs(asy::beam_gamma_fixed_point(r, bs) - asy::beam_gamma_closed_form(r, bs));
        const bool pass = jump < 1e-8;
        ok = ok && pass;
        std::printf("continuity at b_star(%g): %.3g %s\n", r, jump, pass ? "ok" : "FAIL");
    }
    const double miso = std::abs(asy::beam_gamma(1e-6, 1.0) - 0.5);
    std::printf("MISO limit |gamma(1e-6, 1) - 0.5| = %.3g %s\n", miso, miso < 5e-3 ? "ok" : "FAIL");
    ok = ok && miso < 5e-3;
    // identities on a small grid
    for (double r : {0.2, 0.5, 1.0})
        for (double rho : {0.1, 1.0, 10.0}) {
            const double d = std::abs(asy::mu_j(r, 1.0, rho) - asy::cap_no_feedback(r, rho));
            const bool pass = d < 1e-9;
            ok = ok && pass;
            if (!pass) std::printf("mu_j(k_bar=1) identity failed at (%g, %g): %.3g\n", r, rho, d);
            const bool order = asy::mmse_mu(r, 0.5 * r, 1.0 / rho) >= asy::mf_mu(r, 0.5 * r, 1.0 / rho);
            ok = ok && order;
            if (!order) std::printf("mmse/mf ordering failed at (%g, %g)\n", r, rho);
        }
    std::printf("%s\n", ok ? "verify: PASS" : "verify: FAIL");
    return ok ? 0 : kExitTolerance;
}

std::vector<double> parse_grid(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw rvq::ConfigError("bad grid value '" + tok + "'");
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rvqsim: limited-feedback MIMO precoding with random vector quantization"};
    app.require_subcommand(1);
    Global g;
    app.add_option("--seed", g.seed, "master seed")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads (0 = all cores)")->capture_default_str();
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_flag("--bits", g.bits, "report rates in bits instead of nats");

    double nr_bar = 1.0, k_bar = 1.0, b_bar = 0.0, b_hat = 0.0, rho_db = 10.0, sigma2 = -1.0;
    std::string receiver = "optimal";
    auto* asym = app.add_subcommand("asymptotic", "evaluate the large-system closed forms");
    asym->add_option("--nr-bar", nr_bar)->capture_default_str();
    asym->add_option("--k-bar", k_bar)->capture_default_str();
    asym->add_option("--b-bar", b_bar)->capture_default_str();
    asym->add_option("--b-hat", b_hat)->capture_default_str();
    asym->add_option("--rho-db", rho_db)->capture_default_str();
    asym->add_option("--receiver", receiver)->check(CLI::IsMember({"optimal", "mf", "mmse"}))->capture_default_str();
    asym->add_option("--sigma2", sigma2, "variance of N_r^2 J; enables the Gaussian-approximation rate");

    std::string config_file, kind = "rvq_rate", grid = "0";
    int n_t = 8, n_r = 4, k = 4, trials = 500, sigma_trials = 4000, sigma_n_t = 64;
    auto* mc = app.add_subcommand("montecarlo", "custom finite-system run");
    mc->add_option("--config", config_file, "JSON experiment config (overrides the other flags)");
    mc->add_option("--kind", kind)
        ->check(CLI::IsMember({"projection", "miso_gap", "beam_gap", "rvq_rate", "scalar_rate", "waterfill",
                               "onoff_capacity"}))
        ->capture_default_str();
    mc->add_option("--n-t", n_t)->capture_default_str();
    mc->add_option("--n-r", n_r)->capture_default_str();
    mc->add_option("--k", k)->capture_default_str();
    mc->add_option("--rho-db", rho_db)->capture_default_str();
    mc->add_option("--receiver", receiver)->check(CLI::IsMember({"optimal", "mf", "mmse"}))->capture_default_str();
    mc->add_option("--grid", grid, "comma-separated b_bar (beamforming) or b_hat (precoding) values")
        ->capture_default_str();
    mc->add_option("--trials", trials)->capture_default_str();
    mc->add_option("--sigma-trials", sigma_trials)->capture_default_str();
    mc->add_option("--sigma-n-t", sigma_n_t)->capture_default_str();

    std::string preset_name;
    std::optional<int> f_trials, f_sigma_trials, f_sigma_n_t;
    auto* fig = app.add_subcommand("figure", "reproduce a figure preset");
    fig->add_option("preset", preset_name, "fig1 fig2 fig3 fig4 fig5 fig6 fig8 fig9")->required();
    fig->add_option("--trials", f_trials, "trials per grid point");
    fig->add_option("--sigma-trials", f_sigma_trials, "channels for the variance estimate");
    fig->add_option("--sigma-n-t", f_sigma_n_t, "system size for the variance estimate");

    auto* ver = app.add_subcommand("verify", "beamforming-gain cross-check and closed-form identities");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*asym) return cmd_asymptotic(nr_bar, k_bar, b_bar, b_hat, rho_db, receiver, sigma2, g);
        if (*ver) return cmd_verify(g);
        if (*fig) {
            const auto preset = hn::parse_preset(preset_name);
            hn::PresetOptions po{f_trials, f_sigma_trials, f_sigma_n_t};
            return run_and_write(hn::make_preset(preset, g.seed, po), g);
        }
        if (*mc) {
            hn::ExperimentConfig cfg;
            if (!config_file.empty()) {
                std::ifstream f(config_file);
                if (!f) throw rvq::ConfigError("cannot read " + config_file);
                std::stringstream ss;
                ss << f.rdbuf();
                cfg = hn::config_from_json(ss.str());
            } else {
                cfg.preset = hn::Preset::custom;
                cfg.master_seed = g.seed;
                hn::SeriesSpec s;
                s.name = kind;
                s.kind = kind == "projection"       ? hn::SeriesKind::projection
                         : kind == "miso_gap"       ? hn::SeriesKind::miso_gap
                         : kind == "beam_gap"       ? hn::SeriesKind::beam_gap
                         : kind == "scalar_rate"    ? hn::SeriesKind::scalar_rate
                         : kind == "waterfill"      ? hn::SeriesKind::waterfill
                         : kind == "onoff_capacity" ? hn::SeriesKind::onoff_capacity
                                                    : hn::SeriesKind::rvq_rate;
                s.n_t = n_t;
                s.n_r = n_r;
                s.k = k;
                s.rho_db = rho_db;
                s.receiver = receiver == "mf" ? asy::Receiver::mf
                             : receiver == "mmse" ? asy::Receiver::mmse
                                                  : asy::Receiver::optimal;
                s.grid = parse_grid(grid);
                s.trials = trials;
                s.sigma_trials = sigma_trials;
                s.sigma_n_t = sigma_n_t;
                cfg.series.push_back(s);
            }
            return run_and_write(cfg, g);
        }
    } catch (const rvq::InvalidArgument& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return kExitConfig;
    } catch (const rvq::CapacityExceeded& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
