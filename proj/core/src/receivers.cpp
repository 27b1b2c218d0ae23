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

#include "rvq/receivers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rvq/errors.hpp"

namespace rvq::receivers {

namespace {

void check_shapes(const ChannelMatrix& h, const CMatrix& v, const char* who) {
    if (v.rows() != h.n_t() || v.cols() < 1)
        throw InvalidArgument(std::string(who) + ": precoder must be N_t x K with K >= 1");
    if (!v.allFinite())
        throw InvalidMatrix(std::string(who) + ": non-finite precoder");
}

CMatrix effective_gram(const ChannelMatrix& h, const CMatrix& v) {
    const CMatrix g = h.matrix() * v;
    return g.adjoint() * g;
}

// ln det of a Hermitian positive definite matrix.
double log_det_hpd(const CMatrix& m) {
    Eigen::LLT<CMatrix> llt(m);
    if (llt.info() != Eigen::Success)
        throw InvalidMatrix("log-det: matrix is not positive definite");
    double s = 0.0;
    const CMatrix& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < l.rows(); ++i) s += std::log(l(i, i).real());
    return 2.0 * s;
}

}  // namespace

double optimal_rate_from_gram(const CMatrix& q, int n_r, double rho) {
    const auto k = q.rows();
    CMatrix m = (rho / static_cast<double>(k)) * q;
    m.diagonal().array() += 1.0;
    return log_det_hpd(m) / n_r;
}

void mf_sinr_from_gram(const CMatrix& q, double sigma_n2, std::vector<double>& out) {
    const auto k = q.rows();
    out.resize(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i) {
        const double d = q(i, i).real();
        double interference = 0.0;
        for (Eigen::Index j = 0; j < k; ++j)
            if (j != i) interference += std::norm(q(i, j));
        const double denom = static_cast<double>(k) * sigma_n2 * d + interference;
        out[static_cast<std::size_t>(i)] = denom > 0.0 ? d * d / denom : 0.0;
    }
}

void mmse_sinr_from_gram(const CMatrix& q, double sigma_n2, std::vector<double>& out) {
    const auto k = q.rows();
    const double c = static_cast<double>(k) * sigma_n2;
    CMatrix w = q;
    w.diagonal().array() += c;
    const CMatrix winv = w.llt().solve(CMatrix::Identity(k, k));
    out.resize(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i)
        out[static_cast<std::size_t>(i)] = std::max(0.0, 1.0 / (c * winv(i, i).real()) - 1.0);
}

double sum_rate_from_sinrs(std::span<const double> sinrs, int n_r) {
    double s = 0.0;
    for (double g : sinrs) s += std::log1p(g);
    return s / n_r;
}

RatePerRxAntenna mutual_info_optimal(const ChannelMatrix& h, const CMatrix& v, double rho) {
    check_shapes(h, v, "mutual_info_optimal");
    if (!(rho > 0.0) || !std::isfinite(rho))
        throw InvalidArgument("mutual_info_optimal: rho must be finite and > 0");
    for (Eigen::Index c = 0; c < v.cols(); ++c)
        if (std::abs(v.col(c).norm() - 1.0) > 1e-8)
            throw InvalidArgument("mutual_info_optimal: precoder columns must have unit norm");
    const int n_r = h.n_r();
    const auto k = v.cols();
    if (k <= n_r) return {optimal_rate_from_gram(effective_gram(h, v), n_r, rho)};
    // Sylvester: same determinant on the smaller side.
    const CMatrix g = h.matrix() * v;
    CMatrix m = (rho / static_cast<double>(k)) * (g * g.adjoint());
    m.diagonal().array() += 1.0;
    return {log_det_hpd(m) / n_r};
}

StreamSinrs linear_sinr(const ChannelMatrix& h, const CMatrix& v, double sigma_n2, LinearKind kind) {
    check_shapes(h, v, "linear_sinr");
    if (!(sigma_n2 > 0.0) || !std::isfinite(sigma_n2))
        throw InvalidArgument("linear_sinr: sigma_n2 must be finite and > 0");
    StreamSinrs out;
    out.kind = kind;
    const CMatrix q = effective_gram(h, v);
    if (kind == LinearKind::mf)
        mf_sinr_from_gram(q, sigma_n2, out.per_stream);
    else
        mmse_sinr_from_gram(q, sigma_n2, out.per_stream);
    return out;
}

RatePerRxAntenna sum_rate(const StreamSinrs& sinrs, int n_r) {
    if (n_r < 1) throw InvalidArgument("sum_rate: n_r must be >= 1");
    for (double g : sinrs.per_stream)
        if (!(g >= 0.0)) throw InvalidArgument("sum_rate: SINRs must be non-negative");
    return {sum_rate_from_sinrs(sinrs.per_stream, n_r)};
}

WaterFilling water_filling(std::span<const double> eigenvalues, double rho, int n_r) {
    if (!(rho > 0.0)) throw InvalidArgument("water_filling: rho must be > 0");
    if (n_r < 1) throw InvalidArgument("water_filling: n_r must be >= 1");
    for (double l : eigenvalues)
        if (!(l >= 0.0) || !std::isfinite(l))
            throw InvalidArgument("water_filling: eigenvalues must be finite and >= 0");

    WaterFilling out;
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < eigenvalues.size(); ++i)
        if (eigenvalues[i] > 0.0) order.push_back(i);
    if (order.empty()) return out;  // no usable mode

    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return eigenvalues[a] > eigenvalues[b]; });

    // Largest active set whose water level stays above every active floor.
    std::size_t active = 0;
    double mu = 0.0, floors = 0.0;
    for (std::size_t m = 1; m <= order.size(); ++m) {
        floors += 1.0 / (rho * eigenvalues[order[m - 1]]);
        const double level = (1.0 + floors) / static_cast<double>(m);
        if (level > 1.0 / (rho * eigenvalues[order[m - 1]])) {
            active = m;
            mu = level;
        } else {
            break;
        }
    }
    out.water_level = mu;
    out.powers.assign(eigenvalues.size(), 0.0);
    double cap = 0.0;
    for (std::size_t m = 0; m < active; ++m) {
        const std::size_t i = order[m];
        const double p = std::max(0.0, mu - 1.0 / (rho * eigenvalues[i]));
        out.powers[i] = p;
        cap += std::log1p(rho * p * eigenvalues[i]);
    }
    out.capacity.nats = cap / n_r;
    return out;
}

}  // namespace rvq::receivers
