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

// Reference computations for tests. Each one takes the most literal route to
// its quantity (dense inverses, eigen-decompositions, explicit filters) so it
// shares no code path with the library implementation it checks.

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "rvq/randmat.hpp"

namespace rvq::oracle {

using randmat::CMatrix;

/// Kolmogorov-Smirnov statistic of a sample against a continuous cdf.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic p-value for a KS statistic with effective sample size n_eff,
/// using the Kolmogorov series with the Stephens small-sample correction.
double ks_pvalue(double d, double n_eff);

/// (1/N_r) sum_k ln(1 + rho/K * ev_k) over the eigenvalues of H V V^H H^H.
double logdet_rate_eig(const CMatrix& h, const CMatrix& v, double rho);

/// SINR of stream k for receive filter w, signal power 1/K per stream and
/// noise variance sigma_n2.
double sinr_quotient(const CMatrix& h, const CMatrix& v, const Eigen::VectorXcd& w, int k, double sigma_n2);

/// Per-stream SINRs with the matched filter w_k = g_k.
std::vector<double> mf_sinr_direct(const CMatrix& h, const CMatrix& v, double sigma_n2);

/// Per-stream SINRs with w_k = (sum_{i != k} g_i g_i^H / K + sigma_n2 I)^{-1} g_k.
std::vector<double> mmse_sinr_direct(const CMatrix& h, const CMatrix& v, double sigma_n2);

struct BruteForceChoice {
    std::size_t index = 0;
    double value = 0.0;
};

/// First index of the strictly largest value.
BruteForceChoice argmax_first(const std::vector<double>& values);

}  // namespace rvq::oracle
