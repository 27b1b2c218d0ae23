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

#include <span>
#include <vector>

#include "rvq/randmat.hpp"

namespace rvq::receivers {

using randmat::ChannelMatrix;
using randmat::CMatrix;

/// Sum mutual information normalised by N_r, in nats.
struct RatePerRxAntenna {
    double nats = 0.0;
};

enum class LinearKind { mf, mmse };

struct StreamSinrs {
    std::vector<double> per_stream;
    LinearKind kind = LinearKind::mf;
};

/// (1/N_r) ln det(I + (rho/K) H V V^H H^H). V must have unit-norm columns
/// but need not be orthogonal.
RatePerRxAntenna mutual_info_optimal(const ChannelMatrix& h, const CMatrix& v, double rho);

/// Per-stream SINR of the matched filter or the linear MMSE filter.
StreamSinrs linear_sinr(const ChannelMatrix& h, const CMatrix& v, double sigma_n2, LinearKind kind);

/// (1/N_r) sum_k ln(1 + gamma_k).
RatePerRxAntenna sum_rate(const StreamSinrs& sinrs, int n_r);

struct WaterFilling {
    std::vector<double> powers;  ///< same order as the input eigenvalues, sums to 1
    double water_level = 0.0;
    RatePerRxAntenna capacity;
};

/// Water-filling over eigenvalues of H^H H with unit total power:
/// p_i = max(0, mu - 1/(rho lambda_i)), capacity = (1/N_r) sum ln(1 + rho p_i lambda_i).
/// All-zero spectra give zero capacity and an empty allocation.
WaterFilling water_filling(std::span<const double> eigenvalues, double rho, int n_r);

// Everything below works on the K x K effective Gram matrix Q = (HV)^H (HV),
// which is all a per-entry codebook search needs.

/// (1/N_r) ln det(I_K + (rho/K) Q).
double optimal_rate_from_gram(const CMatrix& q, int n_r, double rho);

/// gamma_k = Q_kk^2 / (K sigma^2 Q_kk + sum_{i != k} |Q_ki|^2)
void mf_sinr_from_gram(const CMatrix& q, double sigma_n2, std::vector<double>& out);

/// gamma_k = 1 / (K sigma^2 [(Q + K sigma^2 I)^{-1}]_kk) - 1, which equals
/// g_k^H (sum_{i != k} g_i g_i^H + K sigma^2 I)^{-1} g_k without forming any
/// N_r x N_r inverse.
void mmse_sinr_from_gram(const CMatrix& q, double sigma_n2, std::vector<double>& out);

double sum_rate_from_sinrs(std::span<const double> sinrs, int n_r);

}  // namespace rvq::receivers
