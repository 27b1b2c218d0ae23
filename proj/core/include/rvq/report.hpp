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

#include <filesystem>
#include <string>
#include <vector>

#include "rvq/harness.hpp"

namespace rvq::harness {

inline constexpr const char* kCsvHeader = "sweep,sim_mean,sim_stderr,asymptotic,trials,b_used,seed";

struct OutputOptions {
    bool bits = false;  ///< report rate-valued series in bits instead of nats
};

/// One series as CSV: the fixed header, then one row per grid point with
/// empty fields where a column has no value. Numbers use %.12g.
std::string series_csv(const SeriesResult& series, std::uint64_t seed, const OutputOptions& opts = {});

/// fig1 histograms: bin_lo,bin_hi followed by one density column per row.
std::string histogram_csv(const SeriesResult& series);

/// JSON summary with config, metadata, per-series rows and extras, and the
/// compare() outcome. The timestamp is the only non-deterministic field.
std::string summary_json(const ExperimentResult& result, const CompareSummary& cmp,
                         const std::string& timestamp, const OutputOptions& opts = {});

/// Writes <preset>_<series>.csv for every series (plus histogram files) and
/// <preset>_summary.json into dir, creating it if needed. Returns the paths.
std::vector<std::filesystem::path> write_outputs(const ExperimentResult& result, const CompareSummary& cmp,
                                                 const std::filesystem::path& dir,
                                                 const OutputOptions& opts = {});

/// UTC time as an ISO-8601 string.
std::string utc_timestamp();

}  // namespace rvq::harness
