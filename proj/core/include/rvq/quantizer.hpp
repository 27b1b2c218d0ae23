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

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rvq/randmat.hpp"
#include "rvq/rng.hpp"

namespace rvq::quantizer {

using randmat::ChannelMatrix;
using randmat::CMatrix;
using randmat::SemiUnitaryMatrix;

inline constexpr int kDefaultMaxBits = 26;

enum class Origin { rvq, lloyd, scalar };
enum class Metric { optimal, mf, mmse, beam_power };

std::string_view to_string(Origin o) noexcept;
std::string_view to_string(Metric m) noexcept;

/// Read-only view of a sequence of N_t x K candidate precoders.
class CodebookSource {
public:
    virtual ~CodebookSource() = default;
    virtual std::size_t size() const = 0;
    virtual int n_t() const = 0;
    virtual int k() const = 0;
    /// Must be safe to call concurrently from several threads.
    virtual CMatrix entry(std::size_t j) const = 0;
};

class PrecoderCodebook final : public CodebookSource {
public:
    /// Throws InvalidArgument if the entry count is not a power of two, or if
    /// entries disagree in shape.
    PrecoderCodebook(std::vector<SemiUnitaryMatrix> entries, Origin origin, std::uint64_t seed);

    std::size_t size() const override { return entries_.size(); }
    int n_t() const override { return entries_.front().n_t(); }
    int k() const override { return entries_.front().k(); }
    CMatrix entry(std::size_t j) const override { return entries_.at(j).matrix(); }

    const std::vector<SemiUnitaryMatrix>& entries() const noexcept { return entries_; }
    const SemiUnitaryMatrix& operator[](std::size_t j) const { return entries_.at(j); }
    Origin origin() const noexcept { return origin_; }
    std::uint64_t seed() const noexcept { return seed_; }
    int bits() const noexcept { return bits_; }

private:
    std::vector<SemiUnitaryMatrix> entries_;
    Origin origin_;
    std::uint64_t seed_;
    int bits_;
};

/// An RVQ codebook whose entries are regenerated on demand from the seed.
/// Entry j is bit-identical to entry j of generate_rvq_codebook with the same
/// arguments, so large codebooks can be searched without being stored.
class RvqCodebookStream final : public CodebookSource {
public:
    RvqCodebookStream(int n_t, int k, int bits, SeedPolicy seed, std::uint32_t trial = 0,
                      int max_bits = kDefaultMaxBits);

    std::size_t size() const override { return std::size_t{1} << bits_; }
    int n_t() const override { return n_t_; }
    int k() const override { return k_; }
    CMatrix entry(std::size_t j) const override;

private:
    int n_t_, k_, bits_;
    SeedPolicy seed_;
    std::uint32_t trial_;
};

/// Throws CapacityExceeded when bits > max_bits.
PrecoderCodebook generate_rvq_codebook(int n_t, int k, int bits, SeedPolicy seed,
                                       std::uint32_t trial = 0, int max_bits = kDefaultMaxBits);

struct SelectionResult {
    std::size_t index = 0;
    double metric_value = 0.0;
    std::vector<double> per_entry_metrics;  ///< empty unless requested
};

struct SelectOptions {
    bool keep_per_entry = false;
    int threads = 1;
};

/// Value of `metric` for one precoder. rate metrics are nats per receive
/// antenna; beam_power is ||Hv||^2 / N_t.
double evaluate_metric(const ChannelMatrix& h, const CMatrix& v, double rho, Metric metric);

/// Exhaustive search. Ties go to the lowest index regardless of thread count.
SelectionResult select_entry(const ChannelMatrix& h, const CodebookSource& codebook, double rho,
                             Metric metric, const SelectOptions& opts = {});

/// Same as select_entry for several metrics, sharing a single pass over the
/// codebook. Result i corresponds to metrics[i].
std::vector<SelectionResult> select_entries(const ChannelMatrix& h, const CodebookSource& codebook,
                                            double rho, std::span<const Metric> metrics,
                                            const SelectOptions& opts = {});

/// Running maxima over nested prefixes of one codebook: entry [p][m] is the
/// selection for metrics[m] among the first prefix_sizes[p] entries. Sizes
/// must be ascending and no larger than the codebook. One pass, sequential.
std::vector<std::vector<SelectionResult>> select_nested(const ChannelMatrix& h,
                                                        const CodebookSource& codebook, double rho,
                                                        std::span<const Metric> metrics,
                                                        std::span<const std::size_t> prefix_sizes);

struct LloydResult {
    PrecoderCodebook codebook;
    /// mean over the training set of max_j |h^H v_j|^2: the initial codebook
    /// first, then one value per iteration
    std::vector<double> objective_history;
    int iterations = 0;
};

/// Maximum-projection generalised Lloyd iteration for beamforming codebooks.
/// Only the first row of each training channel is used (MISO training set).
/// Needs at least 2^(bits+2) training channels.
LloydResult lloyd_train(std::span<const ChannelMatrix> training, int n_t, int bits, int max_iters,
                        double tol, SeedPolicy seed);

struct ScalarQuantized {
    CMatrix matrix;                  ///< columns have unit norm
    CMatrix unnormalized;            ///< before column renormalisation
    int coefficients_quantized = 0;
    int bits_per_coefficient = 0;    ///< minimum over the quantized coefficients
    double fraction = 0.0;           ///< coefficients_quantized / (N_t K)
    std::string note;                ///< quantizer description for output metadata
};

/// Spreads B bits evenly over a fraction of the coefficients of V and sets the
/// rest to one. Each quantized coefficient uses uniform mid-rise quantizers on
/// [-1, 1] for its real part (ceil(b/2) bits) and imaginary part (floor(b/2)).
ScalarQuantized scalar_quantize_precoder(const CMatrix& v, int bits);

struct ProjectionStats {
    int b_used = 0;
    std::vector<double> samples;
    std::vector<double> histogram;  ///< density over 128 equal bins on [0, 1]
    double mean = 0.0;
    double variance = 0.0;
    double stderr_mean = 0.0;
};

inline constexpr int kHistogramBins = 128;

/// Samples of max_j |h^H v_j|^2 / ||h||^2 for a fresh RVQ codebook and
/// channel per trial, with B = round(b_bar * n_t).
ProjectionStats projection_stats(int n_t, double b_bar, int trials, SeedPolicy seed, int threads = 1);

/// Same law as projection_stats without enumerating the codebook: given h the
/// 2^B projections are i.i.d. Beta(1, n_t - 1), so the maximum is drawn by
/// inverting its cdf (1 - (1 - y)^(n_t - 1))^(2^B). No size guard applies.
ProjectionStats projection_stats_order_statistic(int n_t, double b_bar, int trials, SeedPolicy seed);

int bits_from_b_bar(double b_bar, int n_t);
int bits_from_b_hat(double b_hat, int n_r);

/// JSON form: {"origin", "seed", "bits", "n_t", "k", "entries": [[re, im, ...] row-major]}.
std::string codebook_to_json(const PrecoderCodebook& cb);
PrecoderCodebook codebook_from_json(std::string_view text);

}  // namespace rvq::quantizer
