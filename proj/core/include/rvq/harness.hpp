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

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rvq/asymptotics.hpp"

namespace rvq::harness {

using asymptotics::Receiver;

enum class Preset { fig1, fig2, fig3, fig4, fig5, fig6, fig8, fig9, custom };

std::string_view to_string(Preset p) noexcept;
/// Throws ConfigError for unknown names.
Preset parse_preset(std::string_view name);

enum class SeriesKind {
    projection,      ///< max_j |h^H v_j|^2 / ||h||^2 (MISO), sweep b_bar
    miso_gap,        ///< ln(1 + rho |h^H v|^2) - ln(rho N_t), sweep b_bar
    beam_gap,        ///< MIMO beamforming rate difference, sweep b_bar
    rvq_rate,        ///< rank-K RVQ rate per receive antenna, sweep b_hat
    scalar_rate,     ///< scalar-quantized eigen-precoder, sweep b_hat
    waterfill,       ///< water-filling capacity, flat in the sweep
    onoff_capacity,  ///< equal power on the top K modes, flat in the sweep
    rate_ratio,      ///< analytic, sweep rho_db
    rank_profile,    ///< Gaussian-approximation rate versus k_bar
};

std::string_view to_string(SeriesKind k) noexcept;

enum class SigmaSource { monte_carlo, low_snr, fixed };

enum class ToleranceKind { none, absolute, relative };

struct Tolerance {
    ToleranceKind kind = ToleranceKind::none;
    double value = 0.0;
    double sweep_min = -1e300;  ///< rows outside [sweep_min, sweep_max] are not checked
    double sweep_max = 1e300;
};

struct SeriesSpec {
    std::string name;
    SeriesKind kind = SeriesKind::rvq_rate;
    int n_t = 1;
    int n_r = 1;
    int k = 1;
    double rho_db = 0.0;
    Receiver receiver = Receiver::optimal;
    std::vector<double> grid;  ///< sweep values in the kind's natural unit
    int trials = 0;

    // analytic inputs for rate_ratio / rank_profile
    double nr_bar = 1.0;
    double b_hat = 0.0;

    // Gaussian-model inputs for rvq_rate / rank_profile
    SigmaSource sigma_source = SigmaSource::monte_carlo;
    int sigma_n_t = 64;
    int sigma_trials = 4000;
    double sigma2_fixed = 0.0;

    Tolerance tolerance;
};

struct ExperimentConfig {
    Preset preset = Preset::custom;
    std::uint64_t master_seed = 1;
    std::vector<SeriesSpec> series;

    /// Canonical JSON (sorted keys, fixed number formatting).
    std::string canonical_json() const;
    /// 64-bit FNV-1a of canonical_json(), as 16 hex digits.
    std::string hash() const;
};

/// Throws ConfigError with a description of the first problem found,
/// including codebook-size guard violations.
void validate(const ExperimentConfig& cfg);

ExperimentConfig config_from_json(std::string_view text);

struct Row {
    double sweep = 0.0;
    std::optional<double> sim_mean;
    std::optional<double> sim_stderr;
    std::optional<double> asymptotic;
    int trials = 0;
    int b_used = 0;
};

struct SeriesResult {
    std::string name;
    SeriesKind kind = SeriesKind::rvq_rate;
    bool rate_valued = true;  ///< false for projections and ratios
    std::vector<Row> rows;
    /// Named scalars such as mu, sigma2, cap, bhat_to_cap, argmax_k_bar.
    std::map<std::string, double> extras;
    std::map<std::string, std::string> notes;
    /// fig1 only: one 128-bin density per row.
    std::vector<std::vector<double>> histograms;
};

struct Metadata {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version;
    std::string rng;
};

struct ExperimentResult {
    ExperimentConfig config;
    Metadata metadata;
    std::vector<SeriesResult> series;
    bool complete = true;
    std::string failure;  ///< set when complete == false
};

struct RunOptions {
    int threads = 1;
    /// Called before each series. Throwing from it cancels the run the same
    /// way a failing series does.
    std::function<void(std::string_view)> progress;
};

/// Validates, then runs every series in order. A failure inside a series
/// stops the run and returns what was computed so far with complete = false.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

struct CompareRow {
    std::string series;
    double sweep = 0.0;
    double deviation = 0.0;  ///< |sim - asym|, or relative to |asym| for relative tolerances
    double tolerance = 0.0;
    bool pass = true;
};

struct CompareSummary {
    std::vector<CompareRow> rows;  ///< one per checked row
    double max_deviation = 0.0;
    bool pass = true;
};

/// Checks every row that has both columns and lies in its series' tolerance
/// window. Series without a tolerance contribute deviations but cannot fail.
CompareSummary compare(const ExperimentResult& result);

std::string_view library_version() noexcept;

}  // namespace rvq::harness
