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

#include "rvq/quantizer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "rvq/errors.hpp"
#include "rvq/parallel.hpp"
#include "rvq/receivers.hpp"

namespace rvq::quantizer {

std::string_view to_string(Origin o) noexcept {
    switch (o) {
        case Origin::rvq: return "rvq";
        case Origin::lloyd: return "lloyd";
        case Origin::scalar: return "scalar";
    }
    return "?";
}

std::string_view to_string(Metric m) noexcept {
    switch (m) {
        case Metric::optimal: return "optimal";
        case Metric::mf: return "mf";
        case Metric::mmse: return "mmse";
        case Metric::beam_power: return "beam_power";
    }
    return "?";
}

PrecoderCodebook::PrecoderCodebook(std::vector<SemiUnitaryMatrix> entries, Origin origin,
                                   std::uint64_t seed)
    : entries_(std::move(entries)), origin_(origin), seed_(seed), bits_(0) {
    if (entries_.empty() || !std::has_single_bit(entries_.size()))
        throw InvalidArgument("PrecoderCodebook: entry count must be a power of two");
    for (const auto& e : entries_)
        if (e.n_t() != entries_.front().n_t() || e.k() != entries_.front().k())
            throw InvalidArgument("PrecoderCodebook: entries differ in shape");
    bits_ = std::countr_zero(entries_.size());
}

RvqCodebookStream::RvqCodebookStream(int n_t, int k, int bits, SeedPolicy seed, std::uint32_t trial,
                                     int max_bits)
    : n_t_(n_t), k_(k), bits_(bits), seed_(seed), trial_(trial) {
    if (n_t < 1 || k < 1 || k > n_t) throw InvalidArgument("RVQ codebook: need 1 <= k <= n_t");
    if (bits < 0) throw InvalidArgument("RVQ codebook: bits must be >= 0");
    if (bits > max_bits) throw CapacityExceeded(bits, max_bits);
}

CMatrix RvqCodebookStream::entry(std::size_t j) const {
    auto rng = seed_.stream(trial_, StreamLabel::codebook, static_cast<std::uint32_t>(j));
    return randmat::sample_semi_unitary(n_t_, k_, rng).matrix();
}

PrecoderCodebook generate_rvq_codebook(int n_t, int k, int bits, SeedPolicy seed, std::uint32_t trial,
                                       int max_bits) {
    // Validates the same way as the lazy source.
    RvqCodebookStream src(n_t, k, bits, seed, trial, max_bits);
    std::vector<SemiUnitaryMatrix> entries;
    entries.reserve(src.size());
    for (std::size_t j = 0; j < src.size(); ++j) {
        auto rng = seed.stream(trial, StreamLabel::codebook, static_cast<std::uint32_t>(j));
        entries.push_back(randmat::sample_semi_unitary(n_t, k, rng));
    }
    return PrecoderCodebook(std::move(entries), Origin::rvq, seed.master_seed());
}

namespace {

struct Evaluator {
    const ChannelMatrix& h;
    double rho;
    int n_r;
    std::vector<double> sinr;

    double operator()(const CMatrix& v, Metric m) {
        const CMatrix g = h.matrix() * v;
        const CMatrix q = g.adjoint() * g;
        return from_gram(q, m);
    }

    double from_gram(const CMatrix& q, Metric m) {
        switch (m) {
            case Metric::beam_power:
                return q(0, 0).real() / static_cast<double>(h.n_t());
            case Metric::optimal:
                return receivers::optimal_rate_from_gram(q, n_r, rho);
            case Metric::mf:
                receivers::mf_sinr_from_gram(q, 1.0 / rho, sinr);
                return receivers::sum_rate_from_sinrs(sinr, n_r);
            case Metric::mmse:
                receivers::mmse_sinr_from_gram(q, 1.0 / rho, sinr);
                return receivers::sum_rate_from_sinrs(sinr, n_r);
        }
        return 0.0;
    }
};

struct Best {
    double value = -std::numeric_limits<double>::infinity();
    std::size_t index = std::numeric_limits<std::size_t>::max();

    void offer(double v, std::size_t j) {
        if (v > value || (v == value && j < index)) {
            value = v;
            index = j;
        }
    }
};

}  // namespace

double evaluate_metric(const ChannelMatrix& h, const CMatrix& v, double rho, Metric metric) {
    if (v.rows() != h.n_t()) throw InvalidArgument("evaluate_metric: precoder has wrong row count");
    if (metric == Metric::beam_power && v.cols() != 1)
        throw InvalidArgument("evaluate_metric: beam_power needs k = 1");
    if (metric != Metric::beam_power && !(rho > 0.0))
        throw InvalidArgument("evaluate_metric: rho must be > 0");
    Evaluator ev{h, rho, h.n_r(), {}};
    return ev(v, metric);
}

std::vector<SelectionResult> select_entries(const ChannelMatrix& h, const CodebookSource& codebook,
                                            double rho, std::span<const Metric> metrics,
                                            const SelectOptions& opts) {
    if (codebook.size() == 0) throw InvalidArgument("select_entry: empty codebook");
    if (codebook.n_t() != h.n_t())
        throw InvalidArgument("select_entry: codebook N_t does not match the channel");
    bool needs_rho = false;
    for (Metric m : metrics) {
        if (m == Metric::beam_power && codebook.k() != 1)
            throw InvalidArgument("select_entry: beam_power needs k = 1");
        needs_rho = needs_rho || m != Metric::beam_power;
    }
    if (needs_rho && (!(rho > 0.0) || !std::isfinite(rho)))
        throw InvalidArgument("select_entry: rho must be finite and > 0");

    const std::size_t n = codebook.size();
    const std::size_t nm = metrics.size();
    std::vector<SelectionResult> out(nm);
    if (opts.keep_per_entry)
        for (auto& r : out) r.per_entry_metrics.assign(n, 0.0);

    const int workers = static_cast<int>(std::min<std::size_t>(n, resolve_threads(opts.threads)));
    std::vector<std::vector<Best>> partial(static_cast<std::size_t>(workers), std::vector<Best>(nm));
    parallel_blocks(n, workers, [&](std::size_t begin, std::size_t end, std::size_t w) {
        Evaluator ev{h, rho, h.n_r(), {}};
        for (std::size_t j = begin; j < end; ++j) {
            const CMatrix v = codebook.entry(j);
            const CMatrix g = h.matrix() * v;
            const CMatrix q = g.adjoint() * g;
            for (std::size_t m = 0; m < nm; ++m) {
                const double val = ev.from_gram(q, metrics[m]);
                partial[w][m].offer(val, j);
                if (opts.keep_per_entry) out[m].per_entry_metrics[j] = val;
            }
        }
    });
    for (std::size_t m = 0; m < nm; ++m) {
        Best b;
        for (const auto& p : partial) b.offer(p[m].value, p[m].index);
        out[m].index = b.index;
        out[m].metric_value = b.value;
    }
    return out;
}

SelectionResult select_entry(const ChannelMatrix& h, const CodebookSource& codebook, double rho,
                             Metric metric, const SelectOptions& opts) {
    const Metric ms[] = {metric};
    return std::move(select_entries(h, codebook, rho, ms, opts).front());
}

std::vector<std::vector<SelectionResult>> select_nested(const ChannelMatrix& h,
                                                        const CodebookSource& codebook, double rho,
                                                        std::span<const Metric> metrics,
                                                        std::span<const std::size_t> prefix_sizes) {
    if (codebook.n_t() != h.n_t())
        throw InvalidArgument("select_nested: codebook N_t does not match the channel");
    for (std::size_t p = 0; p < prefix_sizes.size(); ++p) {
        if (prefix_sizes[p] < 1 || prefix_sizes[p] > codebook.size() ||
            (p > 0 && prefix_sizes[p] < prefix_sizes[p - 1]))
            throw InvalidArgument("select_nested: prefix sizes must be ascending within the codebook");
    }
    for (Metric m : metrics) {
        if (m == Metric::beam_power && codebook.k() != 1)
            throw InvalidArgument("select_nested: beam_power needs k = 1");
        if (m != Metric::beam_power && !(rho > 0.0))
            throw InvalidArgument("select_nested: rho must be > 0");
    }
    const std::size_t nm = metrics.size();
    std::vector<std::vector<SelectionResult>> out(prefix_sizes.size(), std::vector<SelectionResult>(nm));
    if (prefix_sizes.empty()) return out;
    std::vector<Best> best(nm);
    Evaluator ev{h, rho, h.n_r(), {}};
    std::size_t next = 0;
    for (std::size_t j = 0; j < prefix_sizes.back(); ++j) {
        const CMatrix v = codebook.entry(j);
        const CMatrix g = h.matrix() * v;
        const CMatrix q = g.adjoint() * g;
        for (std::size_t m = 0; m < nm; ++m) best[m].offer(ev.from_gram(q, metrics[m]), j);
        while (next < prefix_sizes.size() && prefix_sizes[next] == j + 1) {
            for (std::size_t m = 0; m < nm; ++m) out[next][m] = {best[m].index, best[m].value, {}};
            ++next;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Lloyd training

namespace {

randmat::CVector principal_eigenvector(const CMatrix& r) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(r);
    if (es.info() != Eigen::Success) throw SolverError("lloyd_train: eigen-decomposition failed");
    randmat::CVector v = es.eigenvectors().col(r.rows() - 1);
    // Pin the global phase so the result is reproducible.
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    const auto p = v(imax);
    v *= std::conj(p) / std::abs(p);
    return v / v.norm();
}

// Assigns every training vector to the codeword maximising |h^H v|^2 and
// returns the mean of that maximum.
double partition(const std::vector<randmat::CVector>& dirs, const std::vector<randmat::CVector>& code,
                 std::vector<std::size_t>& cell, std::vector<double>& proj) {
    double sum = 0.0;
    for (std::size_t t = 0; t < dirs.size(); ++t) {
        Best b;
        for (std::size_t j = 0; j < code.size(); ++j) b.offer(std::norm(dirs[t].dot(code[j])), j);
        cell[t] = b.index;
        proj[t] = b.value;
        sum += b.value;
    }
    return sum / static_cast<double>(dirs.size());
}

}  // namespace

LloydResult lloyd_train(std::span<const ChannelMatrix> training, int n_t, int bits, int max_iters,
                        double tol, SeedPolicy seed) {
    if (bits < 0) throw InvalidArgument("lloyd_train: bits must be >= 0");
    if (bits > kDefaultMaxBits) throw CapacityExceeded(bits, kDefaultMaxBits);
    if (max_iters < 1) throw InvalidArgument("lloyd_train: max_iters must be >= 1");
    const std::size_t ncode = std::size_t{1} << bits;
    if (training.size() < 4 * ncode)
        throw InvalidArgument("lloyd_train: need at least 2^(B+2) = " + std::to_string(4 * ncode) +
                              " training channels, got " + std::to_string(training.size()));

    std::vector<randmat::CVector> vecs;
    vecs.reserve(training.size());
    for (const auto& h : training) {
        if (h.n_t() != n_t) throw InvalidArgument("lloyd_train: training channel has wrong N_t");
        vecs.push_back(h.matrix().row(0).adjoint());
        if (vecs.back().squaredNorm() == 0.0) throw InvalidArgument("lloyd_train: zero training channel");
    }

    std::vector<randmat::CVector> code(ncode);
    for (std::size_t j = 0; j < ncode; ++j) {
        auto rng = seed.stream(0, StreamLabel::lloyd_init, static_cast<std::uint32_t>(j));
        code[j] = randmat::sample_isotropic_unit_vector(n_t, rng);
    }

    std::vector<std::size_t> cell(vecs.size());
    std::vector<double> proj(vecs.size());
    LloydResult res{PrecoderCodebook({randmat::SemiUnitaryMatrix::from_matrix(code[0])}, Origin::lloyd,
                                     seed.master_seed()),
                    {}, 0};
    res.objective_history.push_back(partition(vecs, code, cell, proj));

    for (int it = 0; it < max_iters; ++it) {
        std::vector<CMatrix> acc(ncode, CMatrix::Zero(n_t, n_t));
        std::vector<std::size_t> count(ncode, 0);
        for (std::size_t t = 0; t < vecs.size(); ++t) {
            acc[cell[t]].noalias() += vecs[t] * vecs[t].adjoint();
            ++count[cell[t]];
        }
        for (std::size_t j = 0; j < ncode; ++j)
            if (count[j] > 0) code[j] = principal_eigenvector(acc[j]);

        // Empty cells take the worst-served member of the largest cell.
        for (std::size_t j = 0; j < ncode; ++j) {
            if (count[j] > 0) continue;
            const auto big = static_cast<std::size_t>(
                std::max_element(count.begin(), count.end()) - count.begin());
            std::size_t worst = vecs.size();
            double worst_p = std::numeric_limits<double>::infinity();
            for (std::size_t t = 0; t < vecs.size(); ++t) {
                if (cell[t] != big) continue;
                const double p = std::norm(vecs[t].dot(code[big]));
                if (p < worst_p) {
                    worst_p = p;
                    worst = t;
                }
            }
            code[j] = vecs[worst] / vecs[worst].norm();
            cell[worst] = j;
            --count[big];
            count[j] = 1;
        }

        const double obj = partition(vecs, code, cell, proj);
        const double prev = res.objective_history.back();
        res.objective_history.push_back(obj);
        res.iterations = it + 1;
        if (obj - prev < tol) break;
    }

    std::vector<SemiUnitaryMatrix> entries;
    entries.reserve(ncode);
    for (const auto& c : code) entries.push_back(SemiUnitaryMatrix::from_matrix(c, 1e-9));
    res.codebook = PrecoderCodebook(std::move(entries), Origin::lloyd, seed.master_seed());
    return res;
}

// ---------------------------------------------------------------------------
// Scalar quantization

namespace {

double uniform_quantize(double x, int bits) {
    const double levels = std::ldexp(1.0, bits);
    const double step = 2.0 / levels;
    double idx = std::floor((std::clamp(x, -1.0, 1.0) + 1.0) / step);
    idx = std::clamp(idx, 0.0, levels - 1.0);
    return -1.0 + (idx + 0.5) * step;
}

}  // namespace

ScalarQuantized scalar_quantize_precoder(const CMatrix& v, int bits) {
    if (bits < 0) throw InvalidArgument("scalar_quantize_precoder: bits must be >= 0");
    if (v.size() == 0 || !v.allFinite()) throw InvalidMatrix("scalar_quantize_precoder: bad input");
    const int n = static_cast<int>(v.size());

    // bits assigned to coefficient i in column-major order
    std::vector<int> alloc(static_cast<std::size_t>(n), 0);
    if (bits >= 2 * n) {
        for (int i = 0; i < n; ++i) alloc[static_cast<std::size_t>(i)] = bits / n + (i < bits % n ? 1 : 0);
    } else {
        for (int i = 0; i < bits / 2; ++i) alloc[static_cast<std::size_t>(i)] = 2;
    }

    ScalarQuantized out;
    out.unnormalized = CMatrix::Ones(v.rows(), v.cols());
    int min_bits = std::numeric_limits<int>::max();
    for (int i = 0; i < n; ++i) {
        const int b = alloc[static_cast<std::size_t>(i)];
        if (b == 0) continue;
        const auto z = v.data()[i];
        out.unnormalized.data()[i] = {uniform_quantize(z.real(), (b + 1) / 2), uniform_quantize(z.imag(), b / 2)};
        ++out.coefficients_quantized;
        min_bits = std::min(min_bits, b);
    }
    out.bits_per_coefficient = out.coefficients_quantized > 0 ? min_bits : 0;
    out.fraction = static_cast<double>(out.coefficients_quantized) / n;
    out.matrix = out.unnormalized;
    for (Eigen::Index c = 0; c < out.matrix.cols(); ++c) out.matrix.col(c).normalize();
    out.note =
        "uniform mid-rise quantizer on [-1,1], ceil(b/2) bits real / floor(b/2) bits imag; "
        "unquantized coefficients set to 1; columns renormalised";
    return out;
}

// ---------------------------------------------------------------------------

int bits_from_b_bar(double b_bar, int n_t) {
    if (!(b_bar >= 0.0)) throw InvalidArgument("b_bar must be >= 0");
    return static_cast<int>(std::lround(b_bar * n_t));
}

int bits_from_b_hat(double b_hat, int n_r) {
    if (!(b_hat >= 0.0)) throw InvalidArgument("b_hat must be >= 0");
    return static_cast<int>(std::lround(b_hat * n_r * n_r));
}

namespace {

void finish_stats(ProjectionStats& st) {
    const auto trials = static_cast<double>(st.samples.size());
    st.histogram.assign(kHistogramBins, 0.0);
    double sum = 0.0;
    for (double x : st.samples) {
        sum += x;
        const auto bin = std::min<std::size_t>(kHistogramBins - 1, static_cast<std::size_t>(x * kHistogramBins));
        st.histogram[bin] += 1.0;
    }
    for (double& c : st.histogram) c *= kHistogramBins / trials;
    st.mean = sum / trials;
    double ss = 0.0;
    for (double x : st.samples) ss += (x - st.mean) * (x - st.mean);
    st.variance = st.samples.size() > 1 ? ss / (trials - 1.0) : 0.0;
    st.stderr_mean = std::sqrt(st.variance / trials);
}

}  // namespace

ProjectionStats projection_stats_order_statistic(int n_t, double b_bar, int trials, SeedPolicy seed) {
    if (n_t < 2) throw InvalidArgument("projection_stats_order_statistic: n_t must be >= 2");
    if (trials < 1) throw InvalidArgument("projection_stats_order_statistic: trials must be >= 1");
    ProjectionStats st;
    st.b_used = bits_from_b_bar(b_bar, n_t);
    const double m = std::ldexp(1.0, st.b_used);
    st.samples.resize(static_cast<std::size_t>(trials));
    for (std::size_t t = 0; t < st.samples.size(); ++t) {
        auto rng = seed.stream(static_cast<std::uint32_t>(t), StreamLabel::isotropic);
        const double u = 1.0 - rng.uniform();  // (0, 1]
        // y = 1 - (1 - u^(1/m))^(1/(n_t-1)), with 1 - u^(1/m) = -expm1(ln(u)/m)
        const double tail = -std::expm1(std::log(u) / m);
        st.samples[t] = 1.0 - std::pow(tail, 1.0 / (n_t - 1));
    }
    finish_stats(st);
    return st;
}

ProjectionStats projection_stats(int n_t, double b_bar, int trials, SeedPolicy seed, int threads) {
    if (n_t < 1) throw InvalidArgument("projection_stats: n_t must be >= 1");
    if (trials < 1) throw InvalidArgument("projection_stats: trials must be >= 1");
    ProjectionStats st;
    st.b_used = bits_from_b_bar(b_bar, n_t);
    RvqCodebookStream probe(n_t, 1, st.b_used, seed);  // guard check
    const std::size_t ncode = probe.size();
    st.samples.assign(static_cast<std::size_t>(trials), 0.0);
    const randmat::SystemDims dims(n_t, 1);
    parallel_for(st.samples.size(), threads, [&](std::size_t t) {
        const auto trial = static_cast<std::uint32_t>(t);
        auto hr = seed.stream(trial, StreamLabel::channel);
        const randmat::CVector h = randmat::sample_channel(dims, hr).matrix().row(0).adjoint();
        const double hn2 = h.squaredNorm();
        double best = 0.0;
        for (std::size_t j = 0; j < ncode; ++j) {
            auto cr = seed.stream(trial, StreamLabel::codebook, static_cast<std::uint32_t>(j));
            const auto v = randmat::sample_isotropic_unit_vector(n_t, cr);
            best = std::max(best, std::norm(h.dot(v)) / hn2);
        }
        st.samples[t] = best;
    });

    finish_stats(st);
    return st;
}

// ---------------------------------------------------------------------------
// Serialization

std::string codebook_to_json(const PrecoderCodebook& cb) {
    nlohmann::json j;
    j["origin"] = std::string(to_string(cb.origin()));
    j["seed"] = cb.seed();
    j["bits"] = cb.bits();
    j["n_t"] = cb.n_t();
    j["k"] = cb.k();
    auto& arr = j["entries"] = nlohmann::json::array();
    for (const auto& e : cb.entries()) {
        std::vector<double> flat;
        flat.reserve(static_cast<std::size_t>(2 * e.matrix().size()));
        for (Eigen::Index r = 0; r < e.matrix().rows(); ++r)
            for (Eigen::Index c = 0; c < e.matrix().cols(); ++c) {
                flat.push_back(e.matrix()(r, c).real());
                flat.push_back(e.matrix()(r, c).imag());
            }
        arr.push_back(std::move(flat));
    }
    return j.dump();
}

PrecoderCodebook codebook_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("codebook_from_json: ") + e.what());
    }
    try {
        const std::string origin = j.at("origin").get<std::string>();
        Origin o;
        if (origin == "rvq") o = Origin::rvq;
        else if (origin == "lloyd") o = Origin::lloyd;
        else if (origin == "scalar") o = Origin::scalar;
        else throw InvalidArgument("codebook_from_json: unknown origin " + origin);
        const int n_t = j.at("n_t").get<int>();
        const int k = j.at("k").get<int>();
        std::vector<SemiUnitaryMatrix> entries;
        for (const auto& e : j.at("entries")) {
            const auto flat = e.get<std::vector<double>>();
            if (flat.size() != static_cast<std::size_t>(2 * n_t * k))
                throw InvalidArgument("codebook_from_json: entry has wrong length");
            CMatrix m(n_t, k);
            std::size_t p = 0;
            for (int r = 0; r < n_t; ++r)
                for (int c = 0; c < k; ++c, p += 2) m(r, c) = {flat[p], flat[p + 1]};
            entries.push_back(SemiUnitaryMatrix::from_matrix(std::move(m), 1e-9));
        }
        PrecoderCodebook cb(std::move(entries), o, j.at("seed").get<std::uint64_t>());
        if (cb.bits() != j.at("bits").get<int>())
            throw InvalidArgument("codebook_from_json: bits field does not match entry count");
        return cb;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("codebook_from_json: ") + e.what());
    }
}

}  // namespace rvq::quantizer
