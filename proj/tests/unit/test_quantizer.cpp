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

#include <doctest.h>

#include <cmath>
#include <string>

#include "checks.hpp"
#include "oracles.hpp"
#include "rvq/errors.hpp"
#include "rvq/quantizer.hpp"
#include "rvq/receivers.hpp"

using namespace rvq;
using rvq::testing::approx;
using namespace rvq::quantizer;
using randmat::CVector;
using randmat::SystemDims;

namespace {

ChannelMatrix channel(int n_t, int n_r, std::uint32_t trial, std::uint64_t seed = 21) {
    auto rng = SeedPolicy(seed).stream(trial, StreamLabel::channel);
    return randmat::sample_channel(SystemDims(n_t, n_r), rng);
}

// Straightforward per-entry metric used as the brute-force reference.
double reference_metric(const ChannelMatrix& h, const CMatrix& v, double rho, Metric m) {
    switch (m) {
        case Metric::optimal: return oracle::logdet_rate_eig(h.matrix(), v, rho);
        case Metric::beam_power: return (h.matrix() * v).squaredNorm() / h.n_t();
        case Metric::mf:
        case Metric::mmse: {
            const auto s = m == Metric::mf ? oracle::mf_sinr_direct(h.matrix(), v, 1.0 / rho)
                                           : oracle::mmse_sinr_direct(h.matrix(), v, 1.0 / rho);
            double r = 0.0;
            for (double g : s) r += std::log1p(g);
            return r / h.n_r();
        }
    }
    return 0.0;
}

}  // namespace

TEST_CASE("RVQ codebook generation") {
    SUBCASE("zero bits gives one entry") {
        const auto cb = generate_rvq_codebook(4, 2, 0, SeedPolicy(1));
        CHECK(cb.size() == 1);
        CHECK(cb.bits() == 0);
        CHECK(cb.origin() == Origin::rvq);
    }
    SUBCASE("eight distinct unit vectors") {
        const auto cb = generate_rvq_codebook(4, 1, 3, SeedPolicy(2));
        REQUIRE(cb.size() == 8);
        for (std::size_t i = 0; i < 8; ++i) {
            CHECK(std::abs(cb[i].matrix().norm() - 1.0) < 1e-12);
            for (std::size_t j = 0; j < i; ++j) CHECK((cb[i].matrix() - cb[j].matrix()).norm() > 1e-6);
        }
    }
    SUBCASE("determinism") {
        const auto a = generate_rvq_codebook(5, 2, 4, SeedPolicy(3));
        const auto b = generate_rvq_codebook(5, 2, 4, SeedPolicy(3));
        const auto c = generate_rvq_codebook(5, 2, 4, SeedPolicy(4));
        for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j].matrix() == b[j].matrix());
        CHECK(a[0].matrix() != c[0].matrix());
    }
    SUBCASE("streamed entries match stored entries bit for bit") {
        const auto cb = generate_rvq_codebook(6, 3, 5, SeedPolicy(5), 9);
        const RvqCodebookStream stream(6, 3, 5, SeedPolicy(5), 9);
        REQUIRE(stream.size() == cb.size());
        for (std::size_t j = 0; j < cb.size(); ++j) CHECK(stream.entry(j) == cb[j].matrix());
    }
    SUBCASE("size guard") {
        CHECK_THROWS_AS(generate_rvq_codebook(4, 1, 27, SeedPolicy(1)), CapacityExceeded);
        try {
            generate_rvq_codebook(4, 1, 5, SeedPolicy(1), 0, 4);
            FAIL("expected CapacityExceeded");
        } catch (const CapacityExceeded& e) {
            CHECK(e.guard() == 4);
            CHECK(std::string(e.what()).find("max_bits=4") != std::string::npos);
        }
        CHECK_THROWS_AS(RvqCodebookStream(4, 1, 30, SeedPolicy(1)), CapacityExceeded);
    }
    SUBCASE("entry count must be a power of two") {
        std::vector<SemiUnitaryMatrix> e(3, SemiUnitaryMatrix::from_matrix(CMatrix::Identity(2, 1)));
        CHECK_THROWS_AS(PrecoderCodebook(e, Origin::rvq, 0), InvalidArgument);
    }
}

TEST_CASE("selection") {
    SUBCASE("single candidate") {
        const auto cb = generate_rvq_codebook(4, 2, 0, SeedPolicy(6));
        for (std::uint32_t t = 0; t < 20; ++t)
            CHECK(select_entry(channel(4, 3, t), cb, 2.0, Metric::mmse).index == 0);
    }
    SUBCASE("a matched beam wins under the optimal metric") {
        const auto h = channel(5, 1, 0);
        const auto random = generate_rvq_codebook(5, 1, 3, SeedPolicy(7));
        std::vector<SemiUnitaryMatrix> entries = random.entries();
        const CVector matched = h.matrix().row(0).adjoint() / h.matrix().norm();
        entries[5] = SemiUnitaryMatrix::from_matrix(matched);
        const PrecoderCodebook cb(entries, Origin::rvq, 7);
        const double rho = 3.0;
        const auto sel = select_entry(h, cb, rho, Metric::optimal);
        CHECK(sel.index == 5);
        CHECK(sel.metric_value == approx(std::log1p(rho * h.matrix().squaredNorm())).epsilon(1e-12));
    }
    SUBCASE("argmax agrees with brute force on a random instance") {
        const auto cb = generate_rvq_codebook(4, 2, 6, SeedPolicy(8));
        for (std::uint32_t t = 0; t < 5; ++t) {
            const auto h = channel(4, 2, t);
            for (Metric m : {Metric::optimal, Metric::mf, Metric::mmse}) {
                CAPTURE(to_string(m));
                std::vector<double> ref;
                for (std::size_t j = 0; j < cb.size(); ++j) ref.push_back(reference_metric(h, cb[j].matrix(), 1.7, m));
                const auto want = oracle::argmax_first(ref);
                const auto got = select_entry(h, cb, 1.7, m, {.keep_per_entry = true, .threads = 1});
                CHECK(got.index == want.index);
                CHECK(got.metric_value == approx(want.value).epsilon(1e-10));
                REQUIRE(got.per_entry_metrics.size() == cb.size());
                double mx = got.per_entry_metrics[0];
                for (std::size_t j = 0; j < cb.size(); ++j) {
                    CHECK(got.per_entry_metrics[j] == approx(ref[j]).epsilon(1e-10));
                    mx = std::max(mx, got.per_entry_metrics[j]);
                }
                CHECK(got.metric_value == mx);
            }
        }
    }
    SUBCASE("ties go to the lowest index for any thread count") {
        const auto base = generate_rvq_codebook(4, 1, 2, SeedPolicy(9));
        std::vector<SemiUnitaryMatrix> e;
        for (int rep = 0; rep < 8; ++rep)
            for (std::size_t j = 0; j < 4; ++j) e.push_back(base[j]);
        const PrecoderCodebook cb(e, Origin::rvq, 9);
        const auto h = channel(4, 1, 3);
        const auto ref = select_entry(h, base, 1.0, Metric::beam_power);
        for (int threads : {1, 2, 3, 7}) {
            const auto s = select_entry(h, cb, 1.0, Metric::beam_power, {.threads = threads});
            CHECK(s.index == ref.index);
            CHECK(s.metric_value == ref.metric_value);
        }
    }
    SUBCASE("beam power and the optimal metric pick the same beam") {
        const auto cb = generate_rvq_codebook(6, 1, 8, SeedPolicy(10));
        for (std::uint32_t t = 0; t < 20; ++t) {
            const auto h = channel(6, 3, t);
            CHECK(select_entry(h, cb, 0.5, Metric::optimal).index == select_entry(h, cb, 0.5, Metric::beam_power).index);
        }
    }
    SUBCASE("one pass over several metrics matches separate passes") {
        const auto cb = generate_rvq_codebook(5, 2, 5, SeedPolicy(11));
        const auto h = channel(5, 3, 1);
        const std::array<Metric, 3> ms{Metric::optimal, Metric::mf, Metric::mmse};
        const auto all = select_entries(h, cb, 2.5, ms, {.threads = 3});
        for (std::size_t i = 0; i < ms.size(); ++i) {
            const auto one = select_entry(h, cb, 2.5, ms[i]);
            CHECK(all[i].index == one.index);
            CHECK(all[i].metric_value == one.metric_value);
        }
    }
    SUBCASE("nested prefixes never lose metric value") {
        const std::array<Metric, 2> ms{Metric::optimal, Metric::mmse};
        const std::vector<std::size_t> sizes{1, 2, 4, 8, 16, 32, 64};
        for (std::uint32_t t = 0; t < 100; ++t) {
            const RvqCodebookStream cb(4, 2, 6, SeedPolicy(12), t);
            const auto h = channel(4, 3, t, 12);
            const auto nested = select_nested(h, cb, 1.0, ms, sizes);
            for (std::size_t p = 1; p < sizes.size(); ++p)
                for (std::size_t m = 0; m < ms.size(); ++m)
                    REQUIRE(nested[p][m].metric_value >= nested[p - 1][m].metric_value);
            const auto full = select_entries(h, cb, 1.0, ms);
            for (std::size_t m = 0; m < ms.size(); ++m) {
                CHECK(nested.back()[m].index == full[m].index);
                CHECK(nested.back()[m].metric_value == full[m].metric_value);
            }
        }
    }
    SUBCASE("invalid inputs") {
        const auto cb = generate_rvq_codebook(4, 2, 1, SeedPolicy(13));
        CHECK_THROWS_AS(select_entry(channel(5, 2, 0), cb, 1.0, Metric::optimal), InvalidArgument);
        CHECK_THROWS_AS(select_entry(channel(4, 2, 0), cb, 0.0, Metric::optimal), InvalidArgument);
        CHECK_THROWS_AS(select_entry(channel(4, 2, 0), cb, -1.0, Metric::mf), InvalidArgument);
        CHECK_THROWS_AS(select_entry(channel(4, 2, 0), cb, 1.0, Metric::beam_power), InvalidArgument);
    }
}

TEST_CASE("Lloyd training") {
    const int n_t = 4;
    std::vector<ChannelMatrix> train;
    for (std::uint32_t t = 0; t < 2000; ++t) train.push_back(channel(n_t, 1, t, 31));

    SUBCASE("one cell converges to the principal eigenvector of the sample covariance") {
        const auto res = lloyd_train(train, n_t, 0, 10, 1e-12, SeedPolicy(1));
        CMatrix cov = CMatrix::Zero(n_t, n_t);
        for (const auto& h : train) {
            const CVector x = h.matrix().row(0).adjoint();
            cov += x * x.adjoint();
        }
        cov /= static_cast<double>(train.size());
        const Eigen::SelfAdjointEigenSolver<CMatrix> es(cov);
        const CVector top = es.eigenvectors().col(n_t - 1);
        const CMatrix c = res.codebook[0].matrix();
        CHECK(std::abs(std::abs(top.dot(c.col(0))) - 1.0) < 1e-8);
        CHECK(res.codebook.origin() == Origin::lloyd);
    }
    SUBCASE("objective never decreases") {
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const auto res = lloyd_train(train, n_t, 3, 30, 0.0, SeedPolicy(seed));
            REQUIRE(res.objective_history.size() >= 2);
            for (std::size_t i = 1; i < res.objective_history.size(); ++i)
                CHECK(res.objective_history[i] >= res.objective_history[i - 1] - 1e-12);
            CHECK(res.codebook.size() == 8);
        }
    }
    SUBCASE("stops at max_iters") {
        const auto res = lloyd_train(train, n_t, 3, 2, 0.0, SeedPolicy(4));
        CHECK(res.iterations <= 2);
    }
    SUBCASE("training-set guard") {
        const std::span<const ChannelMatrix> few(train.data(), 31);
        CHECK_THROWS_AS(lloyd_train(few, n_t, 3, 10, 1e-6, SeedPolicy(1)), InvalidArgument);
        CHECK_NOTHROW(lloyd_train(std::span<const ChannelMatrix>(train.data(), 32), n_t, 3, 2, 1e-6, SeedPolicy(1)));
        CHECK_THROWS_AS(lloyd_train(train, n_t, 3, 0, 1e-6, SeedPolicy(1)), InvalidArgument);
    }
}

TEST_CASE("Lloyd and RVQ codebooks reach similar mean projection at N_t = 4, B = 4") {
    const int n_t = 4, bits = 4;
    std::vector<ChannelMatrix> train;
    for (std::uint32_t t = 0; t < 10000; ++t) train.push_back(channel(n_t, 1, t, 41));
    const auto lloyd = lloyd_train(train, n_t, bits, 200, 1e-9, SeedPolicy(42)).codebook;

    auto mean_projection = [&](const CodebookSource& cb) {
        double acc = 0.0;
        const int n = 20000;
        for (std::uint32_t t = 0; t < n; ++t) {
            const auto h = channel(n_t, 1, t, 43);
            acc += select_entry(h, cb, 1.0, Metric::beam_power).metric_value * n_t / h.matrix().squaredNorm();
        }
        return acc / n;
    };
    const double l = mean_projection(lloyd);
    double r = 0.0;
    for (std::uint32_t c = 0; c < 20; ++c) r += mean_projection(RvqCodebookStream(n_t, 1, bits, SeedPolicy(44), c));
    r /= 20;
    CAPTURE(l);
    CAPTURE(r);
    // E max of 16 Beta(1, 3) draws = integral of 1 - (1 - (1 - y)^3)^16, by quadrature
    CHECK(r == approx(0.6504258682613618).epsilon(0.005));
    CHECK(std::abs(l - r) <= 0.02 * r);
}

TEST_CASE("scalar quantization of precoders") {
    auto rng = SeedPolicy(51).stream(0, StreamLabel::precoder);
    const CMatrix v = randmat::sample_semi_unitary(4, 2, rng).matrix();
    SUBCASE("no bits gives normalised all-ones columns") {
        const auto q = scalar_quantize_precoder(v, 0);
        CHECK(q.coefficients_quantized == 0);
        CHECK(q.fraction == 0.0);
        CHECK((q.unnormalized - CMatrix::Ones(4, 2)).norm() == 0.0);
        CHECK((q.matrix - CMatrix::Constant(4, 2, 0.5)).norm() < 1e-15);
    }
    SUBCASE("sixteen bits per coefficient reproduces the input") {
        const auto q = scalar_quantize_precoder(v, 16 * 8);
        CHECK(q.bits_per_coefficient == 16);
        CHECK(q.fraction == 1.0);
        CHECK((q.unnormalized - v).cwiseAbs().maxCoeff() < 1e-2);
        for (int c = 0; c < 2; ++c) CHECK(std::abs(q.matrix.col(c).norm() - 1.0) < 1e-12);
    }
    SUBCASE("two bits per coefficient covers every coefficient") {
        const auto q = scalar_quantize_precoder(v, 2 * 4 * 2);
        CHECK(q.coefficients_quantized == 8);
        CHECK(q.bits_per_coefficient == 2);
        CHECK(q.fraction == 1.0);
    }
    SUBCASE("a smaller budget quantizes a fraction") {
        const auto q = scalar_quantize_precoder(v, 6);
        CHECK(q.coefficients_quantized == 3);
        CHECK(q.fraction == approx(3.0 / 8.0));
        CHECK_FALSE(q.note.empty());
    }
}

TEST_CASE("projection statistics") {
    const SeedPolicy seed(61);
    SUBCASE("no feedback gives a single Beta(1, N_t - 1) projection") {
        for (int n_t : {3, 8}) {
            const auto st = projection_stats(n_t, 0.0, 4000, seed);
            CHECK(st.b_used == 0);
            CHECK(std::abs(st.mean - 1.0 / n_t) < 3 * st.stderr_mean);
            const double d = oracle::ks_statistic(st.samples, [n_t](double y) { return 1 - std::pow(1 - y, n_t - 1); });
            CHECK(oracle::ks_pvalue(d, 4000) > 0.01);
            double area = 0.0;
            for (double h : st.histogram) area += h / kHistogramBins;
            CHECK(area == approx(1.0));
        }
    }
    SUBCASE("spread of the maximum shrinks with N_t at two bits per antenna") {
        double prev = 1.0;
        for (int n_t : {5, 10, 20}) {
            const auto st = projection_stats_order_statistic(n_t, 2.0, 20000, seed);
            CAPTURE(n_t);
            CHECK(st.variance < prev);
            prev = st.variance;
        }
    }
    SUBCASE("mean at one bit per antenna with 16 antennas") {
        const auto st = projection_stats(16, 1.0, 200, seed);
        CHECK(st.b_used == 16);
        CHECK(std::abs(st.mean - 0.5) < 0.05);
    }
    SUBCASE("order-statistic sampler agrees in law with enumeration") {
        const auto a = projection_stats(4, 1.5, 4000, seed);
        const auto b = projection_stats_order_statistic(4, 1.5, 4000, SeedPolicy(62));
        CHECK(a.b_used == b.b_used);
        CHECK(oracle::ks_pvalue(oracle::ks_statistic_two_sample(a.samples, b.samples), 2000) > 0.01);
    }
    SUBCASE("thread count does not change the samples") {
        const auto a = projection_stats(5, 1.0, 300, seed, 1);
        const auto b = projection_stats(5, 1.0, 300, seed, 4);
        CHECK(a.samples == b.samples);
    }
}

TEST_CASE("feedback rounding") {
    CHECK(bits_from_b_bar(0.5, 6) == 3);
    CHECK(bits_from_b_bar(2.0 / 3.0, 6) == 4);
    CHECK(bits_from_b_hat(0.2, 4) == 3);
    CHECK(bits_from_b_hat(0.5, 9) == 41);
    CHECK_THROWS_AS(bits_from_b_bar(-0.1, 4), InvalidArgument);
}

TEST_CASE("codebook JSON round trip") {
    const auto cb = generate_rvq_codebook(3, 2, 2, SeedPolicy(71));
    const std::string text = codebook_to_json(cb);
    const auto back = codebook_from_json(text);
    CHECK(back.size() == cb.size());
    CHECK(back.seed() == cb.seed());
    CHECK(back.origin() == cb.origin());
    for (std::size_t j = 0; j < cb.size(); ++j) CHECK(back[j].matrix() == cb[j].matrix());
    CHECK_THROWS_AS(codebook_from_json("{\"origin\":\"rvq\"}"), InvalidArgument);
}
