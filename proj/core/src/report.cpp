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

#include "rvq/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numbers>
#include <optional>

#include <json.hpp>

#include "rvq/errors.hpp"

namespace rvq::harness {

namespace {

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string opt_num(const std::optional<double>& x, double scale) { return x ? num(*x * scale) : std::string(); }

double unit_scale(const SeriesResult& s, const OutputOptions& o) {
    return o.bits && s.rate_valued ? 1.0 / std::numbers::ln2 : 1.0;
}

nlohmann::json opt_json(const std::optional<double>& x, double scale) {
    return x ? nlohmann::json(*x * scale) : nlohmann::json(nullptr);
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
    f << text;
    if (!f) throw std::runtime_error("write to " + p.string() + " failed");
}

}  // namespace

std::string series_csv(const SeriesResult& series, std::uint64_t seed, const OutputOptions& opts) {
    const double sc = unit_scale(series, opts);
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& r : series.rows) {
        out += num(r.sweep) + ',' + opt_num(r.sim_mean, sc) + ',' + opt_num(r.sim_stderr, sc) + ',' +
               opt_num(r.asymptotic, sc) + ',' + std::to_string(r.trials) + ',' + std::to_string(r.b_used) + ',' +
               std::to_string(seed) + '\n';
    }
    return out;
}

std::string histogram_csv(const SeriesResult& series) {
    std::string out = "bin_lo,bin_hi";
    for (const auto& r : series.rows) out += ",sweep_" + num(r.sweep);
    out += '\n';
    constexpr int bins = 128;
    for (int b = 0; b < bins; ++b) {
        out += num(static_cast<double>(b) / bins) + ',' + num(static_cast<double>(b + 1) / bins);
        for (const auto& h : series.histograms) out += ',' + (h.empty() ? std::string() : num(h[static_cast<std::size_t>(b)]));
        out += '\n';
    }
    return out;
}

std::string summary_json(const ExperimentResult& result, const CompareSummary& cmp, const std::string& timestamp,
                         const OutputOptions& opts) {
    nlohmann::json j;
    j["config"] = nlohmann::json::parse(result.config.canonical_json());
    j["metadata"] = {{"config_hash", result.metadata.config_hash},
                     {"seed", result.metadata.seed},
                     {"version", result.metadata.version},
                     {"rng", result.metadata.rng},
                     {"timestamp", timestamp},
                     {"units", opts.bits ? "bits" : "nats"}};
    j["complete"] = result.complete;
    if (!result.complete) j["failure"] = result.failure;
    auto& series = j["series"] = nlohmann::json::array();
    for (const auto& s : result.series) {
        const double sc = unit_scale(s, opts);
        nlohmann::json js;
        js["name"] = s.name;
        js["kind"] = std::string(to_string(s.kind));
        js["extras"] = s.extras;
        js["notes"] = s.notes;
        auto& rows = js["rows"] = nlohmann::json::array();
        for (const auto& r : s.rows)
            rows.push_back({{"sweep", r.sweep},
                            {"sim_mean", opt_json(r.sim_mean, sc)},
                            {"sim_stderr", opt_json(r.sim_stderr, sc)},
                            {"asymptotic", opt_json(r.asymptotic, sc)},
                            {"trials", r.trials},
                            {"b_used", r.b_used}});
        series.push_back(std::move(js));
    }
    auto& c = j["compare"];
    c["pass"] = cmp.pass;
    c["max_deviation"] = cmp.max_deviation;
    c["rows"] = nlohmann::json::array();
    for (const auto& r : cmp.rows)
        c["rows"].push_back({{"series", r.series},
                             {"sweep", r.sweep},
                             {"deviation", r.deviation},
                             {"tolerance", std::isfinite(r.tolerance) ? nlohmann::json(r.tolerance) : nlohmann::json(nullptr)},
                             {"pass", r.pass}});
    return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_outputs(const ExperimentResult& result, const CompareSummary& cmp,
                                                 const std::filesystem::path& dir, const OutputOptions& opts) {
    std::filesystem::create_directories(dir);
    const std::string prefix(to_string(result.config.preset));
    std::vector<std::filesystem::path> paths;
    for (const auto& s : result.series) {
        auto p = dir / (prefix + "_" + s.name + ".csv");
        write_file(p, series_csv(s, result.metadata.seed, opts));
        paths.push_back(p);
        if (!s.histograms.empty()) {
            auto hp = dir / (prefix + "_" + s.name + "_hist.csv");
            write_file(hp, histogram_csv(s));
            paths.push_back(hp);
        }
    }
    auto jp = dir / (prefix + "_summary.json");
    write_file(jp, summary_json(result, cmp, utc_timestamp(), opts));
    paths.push_back(jp);
    return paths;
}

std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace rvq::harness
