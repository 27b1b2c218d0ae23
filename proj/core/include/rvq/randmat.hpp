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

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <vector>

#include "rvq/rng.hpp"

namespace rvq::randmat {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Finite-system sizes: transmit antennas, receive antennas, precoder rank
/// and feedback bits.
class SystemDims {
public:
    /// Throws InvalidArgument unless n_t >= 1, n_r >= 1, 1 <= k <= n_t, b >= 0.
    SystemDims(int n_t, int n_r, int k = 1, int b = 0);

    int n_t() const noexcept { return n_t_; }
    int n_r() const noexcept { return n_r_; }
    int k() const noexcept { return k_; }
    int b() const noexcept { return b_; }

    double nr_bar() const noexcept { return static_cast<double>(n_r_) / n_t_; }
    double k_bar() const noexcept { return static_cast<double>(k_) / n_t_; }

    bool operator==(const SystemDims&) const = default;

private:
    int n_t_;
    int n_r_;
    int k_;
    int b_;
};

/// N_r x N_t matrix of fading gains.
class ChannelMatrix {
public:
    /// Wraps an arbitrary matrix; throws InvalidMatrix on non-finite entries
    /// or an empty shape.
    explicit ChannelMatrix(CMatrix entries);

    const CMatrix& matrix() const noexcept { return h_; }
    int n_r() const noexcept { return static_cast<int>(h_.rows()); }
    int n_t() const noexcept { return static_cast<int>(h_.cols()); }

private:
    CMatrix h_;
};

/// N_t x K matrix with orthonormal columns (V^H V = I_K).
class SemiUnitaryMatrix {
public:
    /// Throws InvalidMatrix if V^H V deviates from I_K by more than `tol`.
    static SemiUnitaryMatrix from_matrix(CMatrix v, double tol = 1e-10);

    const CMatrix& matrix() const noexcept { return v_; }
    int n_t() const noexcept { return static_cast<int>(v_.rows()); }
    int k() const noexcept { return static_cast<int>(v_.cols()); }

    /// max |(V^H V - I)_ij|
    double unitarity_error() const;

private:
    explicit SemiUnitaryMatrix(CMatrix v) : v_(std::move(v)) {}
    friend SemiUnitaryMatrix sample_semi_unitary(int, int, RandomStream&);

    CMatrix v_;
};

enum class GramSide { transmit, receive };

ChannelMatrix sample_channel(const SystemDims& dims, RandomStream& rng);

/// Uniform direction on the complex unit sphere in C^n_t.
CVector sample_isotropic_unit_vector(int n_t, RandomStream& rng);

/// Haar-distributed point on the complex Stiefel manifold: the Q factor, with
/// positive real diag(R), of an i.i.d. Gaussian N_t x K matrix.
SemiUnitaryMatrix sample_semi_unitary(int n_t, int k, RandomStream& rng);

/// Eigenvalues of (1/N_t) H^H H (transmit, length N_t) or (1/N_t) H H^H
/// (receive, length N_r), descending. Values in [-1e-12 * scale, 0) are
/// clamped to zero; anything more negative is an error.
std::vector<double> gram_eigenvalues(const ChannelMatrix& h, GramSide side);

}  // namespace rvq::randmat
