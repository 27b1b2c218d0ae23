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

#include "rvq/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <tuple>

#include <json.hpp>

#include "rvq/errors.hpp"
#include "rvq/parallel.hpp"
#include "rvq/quantizer.hpp"
#include "rvq/randmat.hpp"
#include "rvq/receivers.hpp"

#ifndef RVQ_VERSION
#define RVQ_VERSION "0.0.0"
#endif

namespace rvq::harness {

namespace asy = rvq::asymptotics;
namespace qz = rvq::quantizer;
using nlohmann::json;
using randmat::ChannelMatrix;
using randmat::CMatrix;

std::string_view library_version() noexcept { return RVQ_VERSION; }

// ---------------------------------------------------------------------------
// names

namespace {

template <class E, std::size_t N>
E parse_enum(std::string_view s, const std::pair<E, std::string_view> (&table)[N], const char* what) {
    for (const auto& [e, name] : table)
        if (name == s) return e;
    throw ConfigError(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

template <class E, std::size_t N>
std::string_view enum_name(E e, const std::pair<E, std::string_view> (&table)[N]) noexcept {
    for (const auto& [v, name] : table)
        if (v == e) return name;
    return "?";
}

constexpr std::pair<Preset, std::string_view> kPresets[] = {
    {Preset::fig1, "fig1"}, {Preset::fig2, "fig2"}, {Preset::fig3, "fig3"},
    {Preset::fig4, "fig4"}, {Preset::fig5, "fig5"}, {Preset::fig6, "fig6"},
    {Preset::fig8, "fig8"}, {Preset::fig9, "fig9"}, {Preset::custom, "custom"},
};

constexpr std::pair<SeriesKind, std::string_view> kKinds[] = {
    {SeriesKind::projection, "projection"},     {SeriesKind::miso_gap, "miso_gap"},
    {SeriesKind::beam_gap, "beam_gap"},         {SeriesKind::rvq_rate, "rvq_rate"},
    {SeriesKind::scalar_rate, "scalar_rate"},   {SeriesKind::waterfill, "waterfill"},
    {SeriesKind::onoff_capacity, "onoff_capacity"}, {SeriesKind::rate_ratio, "rate_ratio"},
    {SeriesKind::rank_profile, "rank_profile"},
};

constexpr std::pair<Receiver, std::string_view> kReceivers[] = {
    {Receiver::optimal, "optimal"}, {Receiver::mf, "mf"}, {Receiver::mmse, "mmse"}};

constexpr std::pair<SigmaSource, std::string_view> kSigma[] = {
    {SigmaSource::monte_carlo, "monte_carlo"}, {SigmaSource::low_snr, "low_snr"}, {SigmaSource::fixed, "fixed"}};

constexpr std::pair<ToleranceKind, std::string_view> kTol[] = {
    {ToleranceKind::none, "none"}, {ToleranceKind::absolute, "absolute"}, {ToleranceKind::relative, "relative"}};

}  // namespace

std::string_view to_string(Preset p) noexcept { return enum_name(p, kPresets); }
Preset parse_preset(std::string_view name) { return parse_enum(name, kPresets, "preset"); }
std::string_view to_string(SeriesKind k) noexcept { return enum_name(k, kKinds); }

// ---------------------------------------------------------------------------
// config serialisation

namespace {

json series_to_json(const SeriesSpec& s) {
    return json{
        {"name", s.name},
        {"kind", std::string(to_string(s.kind))},
        {"n_t", s.n_t},
        {"n_r", s.n_r},
        {"k", s.k},
        {"rho_db", s.rho_db},
        {"receiver", std::string(enum_name(s.receiver, kReceivers))},
        {"grid", s.grid},
        {"trials", s.trials},
        {"nr_bar", s.nr_bar},
        {"b_hat", s.b_hat},
        {"sigma_source", std::string(enum_name(s.sigma_source, kSigma))},
        {"sigma_n_t", s.sigma_n_t},
        {"sigma_trials", s.sigma_trials},
        {"sigma2_fixed", s.sigma2_fixed},
        {"tolerance",
         {{"kind", std::string(enum_name(s.tolerance.kind, kTol))},
          {"value", s.tolerance.value},
          {"sweep_min", s.tolerance.sweep_min},
          {"sweep_max", s.tolerance.sweep_max}}},
    };
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

SeriesSpec series_from_json(const json& j) {
    SeriesSpec s;
    s.name = j.at("name").get<std::string>();
    s.kind = parse_enum(j.at("kind").get<std::string>(), kKinds, "series kind");
    s.n_t = get_or(j, "n_t", s.n_t);
    s.n_r = get_or(j, "n_r", s.n_r);
    s.k = get_or(j, "k", s.k);
    s.rho_db = get_or(j, "rho_db", s.rho_db);
    if (j.contains("receiver")) s.receiver = parse_enum(j.at("receiver").get<std::string>(), kReceivers, "receiver");
    s.grid = get_or(j, "grid", s.grid);
    s.trials = get_or(j, "trials", s.trials);
    s.nr_bar = get_or(j, "nr_bar", s.nr_bar);
    s.b_hat = get_or(j, "b_hat", s.b_hat);
    if (j.contains("sigma_source"))
        s.sigma_source = parse_enum(j.at("sigma_source").get<std::string>(), kSigma, "sigma source");
    s.sigma_n_t = get_or(j, "sigma_n_t", s.sigma_n_t);
    s.sigma_trials = get_or(j, "sigma_trials", s.sigma_trials);
    s.sigma2_fixed = get_or(j, "sigma2_fixed", s.sigma2_fixed);
    if (j.contains("tolerance")) {
        const json& t = j.at("tolerance");
        if (t.contains("kind")) s.tolerance.kind = parse_enum(t.at("kind").get<std::string>(), kTol, "tolerance kind");
        s.tolerance.value = get_or(t, "value", s.tolerance.value);
        s.tolerance.sweep_min = get_or(t, "sweep_min", s.tolerance.sweep_min);
        s.tolerance.sweep_max = get_or(t, "sweep_max", s.tolerance.sweep_max);
    }
    return s;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::string ExperimentConfig::canonical_json() const {
    json j;
    j["preset"] = std::string(to_string(preset));
    j["master_seed"] = master_seed;
    j["series"] = json::array();
    for (const auto& s : series) j["series"].push_back(series_to_json(s));
    return j.dump();
}

std::string ExperimentConfig::hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_json())));
    return buf;
}

ExperimentConfig config_from_json(std::string_view text) {
    try {
        const json j = json::parse(text.begin(), text.end());
        ExperimentConfig cfg;
        cfg.preset = parse_preset(get_or<std::string>(j, "preset", "custom"));
        cfg.master_seed = get_or<std::uint64_t>(j, "master_seed", 1);
        for (const auto& s : j.at("series")) cfg.series.push_back(series_from_json(s));
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// validation

namespace {

// Bits implied by one grid value for kinds that select from an RVQ codebook.
int bits_for(const SeriesSpec& s, double x) {
    switch (s.kind) {
        case SeriesKind::projection:
        case SeriesKind::miso_gap:
        case SeriesKind::beam_gap:
            return qz::bits_from_b_bar(x, s.n_t);
        case SeriesKind::rvq_rate:
        case SeriesKind::scalar_rate:
        case SeriesKind::waterfill:
        case SeriesKind::onoff_capacity:
            return qz::bits_from_b_hat(x, s.n_r);
        default:
            return 0;
    }
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
    if (cfg.series.empty()) throw ConfigError("config has no series");
    for (const auto& s : cfg.series) {
        const std::string where = "series '" + s.name + "': ";
        if (s.name.empty()) throw ConfigError("series name must not be empty");
        if (s.grid.empty()) throw ConfigError(where + "empty sweep grid");
        for (double x : s.grid)
            if (!std::isfinite(x)) throw ConfigError(where + "non-finite grid value");
        if (s.trials < 0) throw ConfigError(where + "trials must be >= 0");
        if (s.kind == SeriesKind::rate_ratio) {
            if (!(s.nr_bar > 0.0)) throw ConfigError(where + "nr_bar must be > 0");
            continue;
        }
        if (s.kind == SeriesKind::rank_profile) {
            if (!(s.nr_bar > 0.0) || s.nr_bar > 1.0) throw ConfigError(where + "nr_bar must lie in (0, 1]");
            if (!(s.b_hat >= 0.0)) throw ConfigError(where + "b_hat must be >= 0");
            for (double x : s.grid)
                if (!(x > 0.0) || x > 1.0) throw ConfigError(where + "k_bar grid must lie in (0, 1]");
            if (s.sigma_source == SigmaSource::monte_carlo && s.sigma_trials < 1000)
                throw ConfigError(where + "sigma_trials must be >= 1000");
            if (s.trials > 0 && s.n_t < 1) throw ConfigError(where + "n_t must be >= 1");
            continue;
        }
        try {
            randmat::SystemDims dims(s.n_t, s.n_r, s.k);
        } catch (const InvalidArgument& e) {
            throw ConfigError(where + e.what());
        }
        if (s.kind == SeriesKind::projection && s.n_t < 2) throw ConfigError(where + "projection needs n_t >= 2");
        if ((s.kind == SeriesKind::miso_gap || s.kind == SeriesKind::projection) && s.n_r != 1)
            throw ConfigError(where + "MISO kinds need n_r = 1");
        if ((s.kind == SeriesKind::miso_gap || s.kind == SeriesKind::beam_gap) && s.k != 1)
            throw ConfigError(where + "beamforming kinds need k = 1");
        for (double x : s.grid) {
            if (!(x >= 0.0)) throw ConfigError(where + "feedback grid values must be >= 0");
            const int b = bits_for(s, x);
            const bool guarded = s.kind == SeriesKind::miso_gap || s.kind == SeriesKind::beam_gap ||
                                 s.kind == SeriesKind::rvq_rate;
            if (guarded && s.trials > 0 && b > qz::kDefaultMaxBits)
                throw ConfigError(where + "B = " + std::to_string(b) + " exceeds the codebook guard max_bits=" +
                                  std::to_string(qz::kDefaultMaxBits));
        }
        if (s.kind == SeriesKind::rvq_rate && s.sigma_source == SigmaSource::monte_carlo && s.sigma_trials < 1000)
            throw ConfigError(where + "sigma_trials must be >= 1000");
        if (s.kind == SeriesKind::rvq_rate && s.sigma_source == SigmaSource::fixed && !(s.sigma2_fixed >= 0.0))
            throw ConfigError(where + "sigma2_fixed must be >= 0");
        if (s.kind == SeriesKind::rvq_rate && s.sigma_source == SigmaSource::low_snr && s.n_r > s.n_t)
            throw ConfigError(where + "low_snr sigma needs n_r <= n_t");
    }
}

// ---------------------------------------------------------------------------
// Monte Carlo plumbing

namespace {

struct PointStats {
    double mean = 0.0;
    double stderr_mean = 0.0;
};

// fn(trial) returns one value per grid point. Values are stored per trial and
// reduced in index order, so the result does not depend on the thread count.
template <class Fn>
std::vector<PointStats> simulate(std::size_t points, int trials, int threads, Fn&& fn) {
    std::vector<std::vector<double>> vals(points, std::vector<double>(static_cast<std::size_t>(trials)));
    parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
        const std::vector<double> v = fn(static_cast<std::uint32_t>(t));
        for (std::size_t p = 0; p < points; ++p) vals[p][t] = v[p];
    });
    std::vector<PointStats> out(points);
    for (std::size_t p = 0; p < points; ++p) {
        const auto& x = vals[p];
        const double n = static_cast<double>(x.size());
        double s = 0.0, c = 0.0;
        for (double v : x) {
            const double t = s + v;
            c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
            s = t;
        }
        const double m = (s + c) / n;
        double ss = 0.0;
        for (double v : x) ss += (v - m) * (v - m);
        out[p].mean = m;
        out[p].stderr_mean = x.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    }
    return out;
}

void fill_sim(std::vector<Row>& rows, const std::vector<PointStats>& st, int trials) {
    for (std::size_t p = 0; p < rows.size(); ++p) {
        rows[p].sim_mean = st[p].mean;
        rows[p].sim_stderr = st[p].stderr_mean;
        rows[p].trials = trials;
    }
}

double rho_of(const SeriesSpec& s) { return asy::db_to_linear(s.rho_db); }

SeedPolicy sigma_seed(std::uint64_t master) { return SeedPolicy(splitmix64(master ^ 0x7369676d61ULL)); }

qz::Metric metric_for(Receiver r) {
    switch (r) {
        case Receiver::optimal: return qz::Metric::optimal;
        case Receiver::mf: return qz::Metric::mf;
        case Receiver::mmse: return qz::Metric::mmse;
    }
    return qz::Metric::optimal;
}

double rate_with(Receiver r, const ChannelMatrix& h, const CMatrix& v, double rho) {
    if (r == Receiver::optimal) return receivers::mutual_info_optimal(h, v, rho).nats;
    const auto kind = r == Receiver::mf ? receivers::LinearKind::mf : receivers::LinearKind::mmse;
    return receivers::sum_rate(receivers::linear_sinr(h, v, 1.0 / rho, kind), h.n_r()).nats;
}

// Rows in ascending sweep order with b_used filled in.
std::vector<Row> make_rows(const SeriesSpec& s, std::vector<double>& grid) {
    grid = s.grid;
    std::sort(grid.begin(), grid.end());
    std::vector<Row> rows(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
        rows[p].sweep = grid[p];
        rows[p].b_used = bits_for(s, grid[p]);
    }
    return rows;
}

std::vector<std::size_t> prefix_sizes(const std::vector<Row>& rows) {
    std::vector<std::size_t> sizes;
    for (const auto& r : rows) sizes.push_back(std::size_t{1} << r.b_used);
    return sizes;
}

// ---- per-kind runners -----------------------------------------------------

void run_projection(const SeriesSpec& s, std::uint64_t seed, int threads, SeriesResult& out) {
    std::vector<double> grid;
    out.rows = make_rows(s, grid);
    out.rate_valued = false;
    out.notes["method"] = "enumeration for B <= 12, order-statistic inversion above";
    for (auto& row : out.rows) {
        const double b_eff = static_cast<double>(row.b_used) / s.n_t;
        row.asymptotic = 1.0 - std::exp2(-b_eff);
        if (s.trials == 0) {
            out.histograms.emplace_back();
            continue;
        }
        const auto st = row.b_used <= 12
                            ? qz::projection_stats(s.n_t, row.sweep, s.trials, SeedPolicy(seed), threads)
                            : qz::projection_stats_order_statistic(s.n_t, row.sweep, s.trials, SeedPolicy(seed));
        row.sim_mean = st.mean;
        row.sim_stderr = st.stderr_mean;
        row.trials = s.trials;
        out.histograms.push_back(st.histogram);
    }
}

void run_beam(const SeriesSpec& s, std::uint64_t seed, int threads, SeriesResult& out) {
    std::vector<double> grid;
    out.rows = make_rows(s, grid);
    const double rho = rho_of(s);
    const double nr_bar = static_cast<double>(s.n_r) / s.n_t;
    for (auto& row : out.rows) {
        const double b_eff = static_cast<double>(row.b_used) / s.n_t;
        if (s.kind == SeriesKind::miso_gap) {
            const auto gap = asy::miso_rate_gap(b_eff);
            if (!gap.is_minus_infinity()) row.asymptotic = gap.nats();
        } else {
            row.asymptotic = std::log(asy::beam_gamma(nr_bar, b_eff));
        }
    }
    if (s.trials == 0) return;
    const int bmax = out.rows.back().b_used;
    const auto sizes = prefix_sizes(out.rows);
    const randmat::SystemDims dims(s.n_t, s.n_r);
    const SeedPolicy pol(seed);
    const qz::Metric metric[] = {qz::Metric::beam_power};
    const auto st = simulate(out.rows.size(), s.trials, threads, [&](std::uint32_t t) {
        auto hs = pol.stream(t, StreamLabel::channel);
        const auto h = randmat::sample_channel(dims, hs);
        const qz::RvqCodebookStream cb(s.n_t, 1, bmax, pol, t);
        const auto sel = qz::select_nested(h, cb, rho, metric, sizes);
        std::vector<double> v(sizes.size());
        for (std::size_t p = 0; p < sizes.size(); ++p)
            v[p] = std::log(1.0 / (rho * s.n_t) + sel[p][0].metric_value);
        return v;
    });
    fill_sim(out.rows, st, s.trials);
}

// Variance estimates keyed by everything that determines them, so series
// sharing a system (fig6 rank profiles, fig8/9 receivers) reuse one run.
using SigmaKey = std::tuple<double, double, double, int, int, std::uint64_t>;
using SigmaCache = std::map<SigmaKey, std::array<asy::GaussianRateModel, 3>>;

asy::GaussianRateModel model_for(const SeriesSpec& s, Receiver receiver, double nr_bar, double k_bar,
                                 double rho, std::uint64_t seed, int threads, SeriesResult& out,
                                 SigmaCache& cache) {
    asy::GaussianRateModel m;
    switch (s.sigma_source) {
        case SigmaSource::monte_carlo: {
            const SigmaKey key{nr_bar, k_bar, rho, s.sigma_n_t, s.sigma_trials, seed};
            auto it = cache.find(key);
            if (it == cache.end()) {
                asy::SigmaOptions o;
                o.n_t = s.sigma_n_t;
                o.trials = s.sigma_trials;
                o.threads = threads;
                it = cache.emplace(key, asy::estimate_sigma_all(nr_bar, k_bar, rho, sigma_seed(seed), o)).first;
            }
            m = it->second[static_cast<std::size_t>(receiver)];
            break;
        }
        case SigmaSource::low_snr: {
            const auto low = asy::sigma_lowsnr(nr_bar, rho);
            m = asy::closed_form_model(receiver, nr_bar, k_bar, rho, low.sigma2);
            if (!low.in_validity_range) out.notes["sigma_warning"] = "low-SNR variance used above rho = 10^-0.5";
            break;
        }
        case SigmaSource::fixed:
            m = asy::closed_form_model(receiver, nr_bar, k_bar, rho, s.sigma2_fixed);
            break;
    }
    return m;
}

void run_rvq_rate(const SeriesSpec& s, std::uint64_t seed, int threads, SeriesResult& out, SigmaCache& cache) {
    std::vector<double> grid;
    out.rows = make_rows(s, grid);
    const double rho = rho_of(s);
    const double nr_bar = static_cast<double>(s.n_r) / s.n_t;
    const double k_bar = static_cast<double>(s.k) / s.n_t;
    const auto model = model_for(s, s.receiver, nr_bar, k_bar, rho, seed, threads, out, cache);
    const double cap = asy::cap_full_feedback(nr_bar, k_bar, rho);
    out.extras["mu"] = model.mu;
    out.extras["sigma2"] = model.sigma2;
    out.extras["cap"] = cap;
    out.extras["bhat_to_cap"] = asy::bhat_to_reach_cap(model, cap);
    if (model.sample_mean) {
        out.extras["sigma2_stderr"] = model.sigma2_stderr;
        out.extras["sigma_mc_mean"] = *model.sample_mean;
        out.extras["sigma_n_t"] = model.provenance.n_t;
    }
    out.notes["cap"] = "infinite-feedback on-off capacity at the series rank";
    const double nr2 = static_cast<double>(s.n_r) * s.n_r;
    for (auto& row : out.rows) row.asymptotic = asy::gaussian_rate(model, row.b_used / nr2, cap);
    if (s.trials == 0) return;

    const int bmax = out.rows.back().b_used;
    const auto sizes = prefix_sizes(out.rows);
    const randmat::SystemDims dims(s.n_t, s.n_r, s.k);
    const SeedPolicy pol(seed);
    const qz::Metric metric[] = {metric_for(s.receiver)};
    const auto st = simulate(out.rows.size(), s.trials, threads, [&](std::uint32_t t) {
        auto hs = pol.stream(t, StreamLabel::channel);
        const auto h = randmat::sample_channel(dims, hs);
        const qz::RvqCodebookStream cb(s.n_t, s.k, bmax, pol, t);
        const auto sel = qz::select_nested(h, cb, rho, metric, sizes);
        std::vector<double> v(sizes.size());
        for (std::size_t p = 0; p < sizes.size(); ++p) v[p] = sel[p][0].metric_value;
        return v;
    });
    fill_sim(out.rows, st, s.trials);
}

// Eigenvalues of H^H H (unnormalised), descending, with the matching eigenvectors.
void eigen_modes(const ChannelMatrix& h, std::vector<double>& eig, CMatrix* top, int k) {
    const CMatrix g = h.matrix().adjoint() * h.matrix();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(g);
    if (es.info() != Eigen::Success) throw InvalidMatrix("eigen-decomposition failed");
    const auto n = g.rows();
    eig.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) eig[static_cast<std::size_t>(i)] = std::max(0.0, es.eigenvalues()(n - 1 - i));
    if (top) {
        *top = CMatrix(n, k);
        for (int c = 0; c < k; ++c) top->col(c) = es.eigenvectors().col(n - 1 - c);
    }
}

void run_flat(const SeriesSpec& s, std::uint64_t seed, int threads, SeriesResult& out) {
    std::vector<double> grid;
    out.rows = make_rows(s, grid);
    const double rho = rho_of(s);
    const double nr_bar = static_cast<double>(s.n_r) / s.n_t;
    const double k_bar = static_cast<double>(s.k) / s.n_t;
    const bool onoff = s.kind == SeriesKind::onoff_capacity;
    if (onoff) {
        const double cap = asy::cap_full_feedback(nr_bar, k_bar, rho);
        for (auto& row : out.rows) row.asymptotic = cap;
    }
    if (s.trials == 0) return;
    const randmat::SystemDims dims(s.n_t, s.n_r, s.k);
    const SeedPolicy pol(seed);
    const auto st = simulate(1, s.trials, threads, [&](std::uint32_t t) {
        auto hs = pol.stream(t, StreamLabel::channel);
        const auto h = randmat::sample_channel(dims, hs);
        std::vector<double> eig;
        eigen_modes(h, eig, nullptr, 0);
        if (!onoff) return std::vector<double>{receivers::water_filling(eig, rho, s.n_r).capacity.nats};
        double c = 0.0;
        for (int i = 0; i < s.k; ++i) c += std::log1p(rho / s.k * eig[static_cast<std::size_t>(i)]);
        return std::vector<double>{c / s.n_r};
    });
    fill_sim(out.rows, std::vector<PointStats>(out.rows.size(), st.front()), s.trials);
}

void run_scalar(const SeriesSpec& s, std::uint64_t seed, int threads, SeriesResult& out) {
    std::vector<double> grid;
    out.rows = make_rows(s, grid);
    const double rho = rho_of(s);
    out.notes["quantizer"] = qz::scalar_quantize_precoder(CMatrix::Ones(s.n_t, s.k), 0).note;
    out.notes["precoder"] = "top-K eigenvectors of H^H H, quantized coefficient-wise";
    if (s.trials == 0) return;
    const randmat::SystemDims dims(s.n_t, s.n_r, s.k);
    const SeedPolicy pol(seed);
    const auto st = simulate(out.rows.size(), s.trials, threads, [&](std::uint32_t t) {
        auto hs = pol.stream(t, StreamLabel::channel);
        const auto h = randmat::sample_channel(dims, hs);
        std::vector<double> eig;
        CMatrix v;
        eigen_modes(h, eig, &v, s.k);
        std::vector<double> out_v(out.rows.size());
        for (std::size_t p = 0; p < out.rows.size(); ++p)
            out_v[p] = rate_with(s.receiver, h, qz::scalar_quantize_precoder(v, out.rows[p].b_used).matrix, rho);
        return out_v;
    });
    fill_sim(out.rows, st, s.trials);
    for (const auto& row : out.rows)
        out.extras["fraction_at_B" + std::to_string(row.b_used)] =
            qz::scalar_quantize_precoder(CMatrix::Ones(s.n_t, s.k), row.b_used).fraction;
}

void run_rate_ratio(const SeriesSpec& s, SeriesResult& out) {
    std::vector<double> grid;
    out.rows = make_rows(s, grid);
    out.rate_valued = false;
    for (auto& row : out.rows) row.asymptotic = asy::rate_ratio(s.nr_bar, asy::db_to_linear(row.sweep));
}

void run_rank_profile(const SeriesSpec& s, std::uint64_t seed, int threads, SeriesResult& out,
                      SigmaCache& cache) {
    std::vector<double> grid;
    out.rows = make_rows(s, grid);
    const double rho = rho_of(s);
    const int sim_nr = std::max(1, static_cast<int>(std::lround(s.nr_bar * s.n_t)));
    const int sim_bits = qz::bits_from_b_hat(s.b_hat, sim_nr);
    const bool can_sim = s.trials > 0 && sim_bits <= qz::kDefaultMaxBits;
    if (s.trials > 0 && !can_sim) out.notes["sim"] = "skipped: B exceeds the codebook guard";
    double best = -1e300, best_k = 0.0;
    for (auto& row : out.rows) {
        const double k_bar = row.sweep;
        const auto model = model_for(s, Receiver::optimal, s.nr_bar, k_bar, rho, seed, threads, out, cache);
        row.asymptotic = asy::gaussian_rate(model, s.b_hat, asy::cap_full_feedback(s.nr_bar, k_bar, rho));
        row.b_used = sim_bits;
        if (*row.asymptotic > best) {
            best = *row.asymptotic;
            best_k = k_bar;
        }
        const double kk = k_bar * s.n_t;
        if (!can_sim || std::abs(kk - std::round(kk)) > 1e-9) continue;
        const int k = static_cast<int>(std::lround(kk));
        const randmat::SystemDims dims(s.n_t, sim_nr, k);
        const SeedPolicy pol(seed);
        const qz::Metric metric[] = {qz::Metric::optimal};
        const std::size_t size[] = {std::size_t{1} << sim_bits};
        const auto st = simulate(1, s.trials, threads, [&](std::uint32_t t) {
            auto hs = pol.stream(t, StreamLabel::channel);
            const auto h = randmat::sample_channel(dims, hs);
            const qz::RvqCodebookStream cb(s.n_t, k, sim_bits, pol, t);
            return std::vector<double>{qz::select_nested(h, cb, rho, metric, size)[0][0].metric_value};
        });
        row.sim_mean = st[0].mean;
        row.sim_stderr = st[0].stderr_mean;
        row.trials = s.trials;
    }
    out.extras["argmax_k_bar"] = best_k;
    out.extras["max_rate"] = best;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
    validate(cfg);
    ExperimentResult res;
    res.config = cfg;
    SigmaCache cache;
    res.metadata = {cfg.hash(), cfg.master_seed, std::string(library_version()), std::string(kRngIdentifier)};
    for (const auto& s : cfg.series) {
        SeriesResult out;
        out.name = s.name;
        out.kind = s.kind;
        try {
            if (opts.progress) opts.progress("series " + s.name);
            switch (s.kind) {
                case SeriesKind::projection: run_projection(s, cfg.master_seed, opts.threads, out); break;
                case SeriesKind::miso_gap:
                case SeriesKind::beam_gap: run_beam(s, cfg.master_seed, opts.threads, out); break;
                case SeriesKind::rvq_rate: run_rvq_rate(s, cfg.master_seed, opts.threads, out, cache); break;
                case SeriesKind::scalar_rate: run_scalar(s, cfg.master_seed, opts.threads, out); break;
                case SeriesKind::waterfill:
                case SeriesKind::onoff_capacity: run_flat(s, cfg.master_seed, opts.threads, out); break;
                case SeriesKind::rate_ratio: run_rate_ratio(s, out); break;
                case SeriesKind::rank_profile: run_rank_profile(s, cfg.master_seed, opts.threads, out, cache); break;
            }
        } catch (const std::exception& e) {
            res.series.push_back(std::move(out));
            res.complete = false;
            res.failure = "series '" + s.name + "': " + e.what();
            return res;
        }
        res.series.push_back(std::move(out));
    }
    return res;
}

// ---------------------------------------------------------------------------

CompareSummary compare(const ExperimentResult& result) {
    CompareSummary sum;
    for (std::size_t i = 0; i < result.series.size(); ++i) {
        const auto& sr = result.series[i];
        const Tolerance tol =
            i < result.config.series.size() ? result.config.series[i].tolerance : Tolerance{};
        for (const auto& row : sr.rows) {
            if (!row.sim_mean || !row.asymptotic) continue;
            if (row.sweep < tol.sweep_min - 1e-12 || row.sweep > tol.sweep_max + 1e-12) continue;
            CompareRow cr;
            cr.series = sr.name;
            cr.sweep = row.sweep;
            const double diff = std::abs(*row.sim_mean - *row.asymptotic);
            cr.deviation = tol.kind == ToleranceKind::relative ? diff / std::abs(*row.asymptotic) : diff;
            cr.tolerance = tol.kind == ToleranceKind::none ? std::numeric_limits<double>::infinity() : tol.value;
            cr.pass = !(cr.deviation > cr.tolerance);
            sum.max_deviation = std::max(sum.max_deviation, cr.deviation);
            sum.pass = sum.pass && cr.pass;
            sum.rows.push_back(cr);
        }
    }
    if (!result.complete) sum.pass = false;
    return sum;
}

}  // namespace rvq::harness
