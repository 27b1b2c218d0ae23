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

#include "rvq/randmat.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rvq/errors.hpp"

namespace rvq::randmat {

SystemDims::SystemDims(int n_t, int n_r, int k, int b) : n_t_(n_t), n_r_(n_r), k_(k), b_(b) {
    if (n_t < 1 || n_r < 1)
        throw InvalidArgument("SystemDims: antenna counts must be >= 1");
    if (k < 1 || k > n_t)
        throw InvalidArgument("SystemDims: rank k=" + std::to_string(k) + " must lie in [1, n_t=" +
                              std::to_string(n_t) + "]");
    if (b < 0)
        throw InvalidArgument("SystemDims: feedback bits must be >= 0");
}

ChannelMatrix::ChannelMatrix(CMatrix entries) : h_(std::move(entries)) {
    if (h_.size() == 0)
        throw InvalidMatrix("ChannelMatrix: empty matrix");
    if (!h_.allFinite())
        throw InvalidMatrix("ChannelMatrix: non-finite entry");
}

SemiUnitaryMatrix SemiUnitaryMatrix::from_matrix(CMatrix v, double tol) {
    if (v.size() == 0 || v.cols() > v.rows())
        throw InvalidMatrix("SemiUnitaryMatrix: shape must be n_t x k with 1 <= k <= n_t");
    if (!v.allFinite())
        throw InvalidMatrix("SemiUnitaryMatrix: non-finite entry");
    SemiUnitaryMatrix out(std::move(v));
    if (out.unitarity_error() > tol)
        throw InvalidMatrix("SemiUnitaryMatrix: columns are not orthonormal");
    return out;
}

double SemiUnitaryMatrix::unitarity_error() const {
    const CMatrix g = v_.adjoint() * v_ - CMatrix::Identity(v_.cols(), v_.cols());
    return g.cwiseAbs().maxCoeff();
}

ChannelMatrix sample_channel(const SystemDims& dims, RandomStream& rng) {
    CMatrix h(dims.n_r(), dims.n_t());
    // column-major fill order is part of the reproducibility contract
    for (Eigen::Index c = 0; c < h.cols(); ++c)
        for (Eigen::Index r = 0; r < h.rows(); ++r) h(r, c) = rng.complex_normal();
    return ChannelMatrix(std::move(h));
}

CVector sample_isotropic_unit_vector(int n_t, RandomStream& rng) {
    if (n_t < 1) throw InvalidArgument("sample_isotropic_unit_vector: n_t must be >= 1");
    CVector v(n_t);
    double norm2 = 0.0;
    do {
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.complex_normal();
        norm2 = v.squaredNorm();
    } while (norm2 == 0.0);
    v /= std::sqrt(norm2);
    return v;
}

SemiUnitaryMatrix sample_semi_unitary(int n_t, int k, RandomStream& rng) {
    if (n_t < 1 || k < 1 || k > n_t)
        throw InvalidArgument("sample_semi_unitary: need 1 <= k <= n_t");
    CMatrix g(n_t, k);
    for (Eigen::Index c = 0; c < k; ++c)
        for (Eigen::Index r = 0; r < n_t; ++r) g(r, c) = rng.complex_normal();
    // Thin QR by Gram-Schmidt with one re-orthogonalisation pass. Dividing by
    // the positive norm leaves R with a positive real diagonal, which is the
    // normalisation that makes Q Haar distributed.
    for (Eigen::Index c = 0; c < k; ++c) {
        auto col = g.col(c);
        for (int pass = 0; c > 0 && pass < 2; ++pass) {
            const CVector proj = g.leftCols(c).adjoint() * col;
            col.noalias() -= g.leftCols(c) * proj;
        }
        const double nrm = col.norm();
        if (!(nrm > 0.0)) throw InvalidMatrix("sample_semi_unitary: rank-deficient draw");
        col /= nrm;
    }
    return SemiUnitaryMatrix(std::move(g));
}

std::vector<double> gram_eigenvalues(const ChannelMatrix& h, GramSide side) {
    const CMatrix& m = h.matrix();
    const double scale = 1.0 / static_cast<double>(m.cols());
    const CMatrix gram = side == GramSide::transmit ? CMatrix(scale * (m.adjoint() * m))
                                                    : CMatrix(scale * (m * m.adjoint()));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(gram, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw InvalidMatrix("gram_eigenvalues: eigen-decomposition failed");
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), std::greater<>());
    const double clamp = -1e-12 * std::max(1.0, ev.empty() ? 0.0 : ev.front());
    for (double& x : ev) {
        if (x < clamp)
            throw InvalidMatrix("gram_eigenvalues: negative eigenvalue " + std::to_string(x));
        x = std::max(x, 0.0);
    }
    return ev;
}

}  // namespace rvq::randmat
