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

#include "rvq/presets.hpp"

#include <cstdio>
#include <string>

#include "rvq/errors.hpp"

namespace rvq::harness {

namespace {

std::vector<double> bits_grid(int b_lo, int b_hi, double per) {
    std::vector<double> g;
    for (int b = b_lo; b <= b_hi; ++b) g.push_back(b / per);
    return g;
}

SeriesSpec base(std::string name, SeriesKind kind, int n_t, int n_r, int k, double rho_db) {
    SeriesSpec s;
    s.name = std::move(name);
    s.kind = kind;
    s.n_t = n_t;
    s.n_r = n_r;
    s.k = k;
    s.rho_db = rho_db;
    return s;
}

std::string db_tag(double db) {
    const int v = static_cast<int>(db);
    return v < 0 ? "m" + std::to_string(-v) + "db" : std::to_string(v) + "db";
}

void fig1(ExperimentConfig& c, const PresetOptions& o) {
    for (int n_t : {5, 10, 20}) {
        auto s = base("nt" + std::to_string(n_t), SeriesKind::projection, n_t, 1, 1, 0.0);
        s.grid = {0.0, 2.0};
        s.trials = o.trials.value_or(20000);
        c.series.push_back(s);
    }
}

void fig2(ExperimentConfig& c, const PresetOptions& o) {
    auto s = base("miso", SeriesKind::miso_gap, 6, 1, 1, 10.0);
    s.grid = bits_grid(3, 12, 6.0);
    s.trials = o.trials.value_or(2000);
    s.tolerance = {ToleranceKind::absolute, 0.15, 0.5, 2.0};
    c.series.push_back(s);
}

void fig3(ExperimentConfig& c, const PresetOptions& o) {
    for (double db : {5.0, 10.0}) {
        auto s = base("mimo_" + db_tag(db), SeriesKind::beam_gap, 16, 24, 1, db);
        s.grid = {0.25, 0.5, 0.75, 1.0};
        s.trials = o.trials.value_or(200);
        s.tolerance = {ToleranceKind::absolute, 0.15, 0.5, 1.0};
        c.series.push_back(s);
    }
}

void fig4(ExperimentConfig& c, const PresetOptions&) {
    for (double r : {0.2, 0.5, 1.0}) {
        char tag[32];
        std::snprintf(tag, sizeof tag, "nr%g", r);
        auto s = base(tag, SeriesKind::rate_ratio, 1, 1, 1, 0.0);
        s.nr_bar = r;
        for (int db = -20; db <= 30; db += 5) s.grid.push_back(db);
        c.series.push_back(s);
    }
}

void fig5(ExperimentConfig& c, const PresetOptions& o) {
    for (double db : {-5.0, 0.0, 5.0}) {
        auto s = base("opt_" + db_tag(db), SeriesKind::rvq_rate, 8, 4, 4, db);
        s.grid = bits_grid(0, 12, 16.0);
        s.trials = o.trials.value_or(1000);
        s.sigma_source = db < 0.0 ? SigmaSource::low_snr : SigmaSource::monte_carlo;
        s.sigma_n_t = o.sigma_n_t.value_or(64);
        s.sigma_trials = o.sigma_trials.value_or(4000);
        s.tolerance = {ToleranceKind::relative, 0.05, 0.0, 0.5};
        c.series.push_back(s);
    }
}

void fig6(ExperimentConfig& c, const PresetOptions& o) {
    const double bhats[] = {0.0, 0.5, 2.0};
    const char* names[] = {"bhat0", "bhat0.5", "bhat2"};
    for (int i = 0; i < 3; ++i) {
        auto s = base(names[i], SeriesKind::rank_profile, 10, 2, 1, 5.0);
        s.nr_bar = 0.2;
        s.b_hat = bhats[i];
        for (int j = 1; j <= 20; ++j) s.grid.push_back(0.05 * j);
        s.trials = o.trials.value_or(500);
        s.sigma_n_t = o.sigma_n_t.value_or(20);
        s.sigma_trials = o.sigma_trials.value_or(1000);
        c.series.push_back(s);
    }
}

void fig89(ExperimentConfig& c, const PresetOptions& o, Receiver linear) {
    const int n_t = 12, n_r = 9, k = 6;
    const double db = 5.0;
    const auto grid = std::vector<double>{0.0, 4.0 / 81, 8.0 / 81, 12.0 / 81, 16.0 / 81};
    const int trials = o.trials.value_or(200);
    const std::string lin = linear == Receiver::mf ? "mf" : "mmse";

    for (Receiver r : {linear, Receiver::optimal}) {
        auto s = base(std::string("rvq_") + (r == Receiver::optimal ? "optimal" : lin), SeriesKind::rvq_rate,
                      n_t, n_r, k, db);
        s.receiver = r;
        s.grid = grid;
        s.trials = trials;
        s.sigma_n_t = o.sigma_n_t.value_or(64);
        s.sigma_trials = o.sigma_trials.value_or(4000);
        s.tolerance = {ToleranceKind::relative, 0.05, 0.0, 0.5};
        c.series.push_back(s);
    }
    auto sq = base("scalar_" + lin, SeriesKind::scalar_rate, n_t, n_r, k, db);
    sq.receiver = linear;
    sq.grid = grid;
    sq.trials = trials;
    c.series.push_back(sq);

    auto on = base("onoff_capacity", SeriesKind::onoff_capacity, n_t, n_r, k, db);
    on.grid = grid;
    on.trials = trials;
    c.series.push_back(on);

    auto wf = base("waterfill", SeriesKind::waterfill, n_t, n_r, k, db);
    wf.grid = grid;
    wf.trials = trials;
    c.series.push_back(wf);
}

}  // namespace

ExperimentConfig make_preset(Preset preset, std::uint64_t seed, const PresetOptions& opts) {
    ExperimentConfig c;
    c.preset = preset;
    c.master_seed = seed;
    switch (preset) {
        case Preset::fig1: fig1(c, opts); break;
        case Preset::fig2: fig2(c, opts); break;
        case Preset::fig3: fig3(c, opts); break;
        case Preset::fig4: fig4(c, opts); break;
        case Preset::fig5: fig5(c, opts); break;
        case Preset::fig6: fig6(c, opts); break;
        case Preset::fig8: fig89(c, opts, Receiver::mf); break;
        case Preset::fig9: fig89(c, opts, Receiver::mmse); break;
        case Preset::custom: throw ConfigError("custom runs are built from flags or a config file");
    }
    return c;
}

}  // namespace rvq::harness
