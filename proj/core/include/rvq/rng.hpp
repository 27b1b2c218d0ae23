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

#include <array>
#include <complex>
#include <cstdint>
#include <string_view>

namespace rvq {

/// Identifier recorded in every experiment result.
inline constexpr std::string_view kRngIdentifier = "philox4x32-10/box-muller/v1";

/// Philox4x32 with 10 rounds (Salmon et al., Random123). Pure function of
/// (counter, key); no state.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Purpose of a random stream. Distinct labels never share counters.
enum class StreamLabel : std::uint32_t {
    channel = 1,
    codebook = 2,
    precoder = 3,
    training = 4,
    lloyd_init = 5,
    isotropic = 6,
    test = 0xffff,
};

/// Address of one random stream under a master seed.
///
/// The counter block of every draw is (block, index, label, trial), so two
/// different (trial, label, index) triples can never overlap.
struct StreamId {
    std::uint32_t trial = 0;
    StreamLabel label = StreamLabel::test;
    std::uint32_t index = 0;
};

class RandomStream;

/// Maps (trial, label, index) to an independent stream. Trivially copyable
/// and safe to share.
class SeedPolicy {
public:
    constexpr explicit SeedPolicy(std::uint64_t master_seed = 0) noexcept : master_(master_seed) {}

    constexpr std::uint64_t master_seed() const noexcept { return master_; }

    RandomStream stream(StreamId id) const noexcept;
    RandomStream stream(std::uint32_t trial, StreamLabel label, std::uint32_t index = 0) const noexcept;

private:
    std::uint64_t master_;
};

/// Sequential draws from one Philox stream. Not thread-safe; each worker owns
/// its own stream.
class RandomStream {
public:
    RandomStream(std::uint64_t key, StreamId id) noexcept;

    std::uint32_t next_u32() noexcept;
    /// Uniform on [0, 1) with 53 bits.
    double uniform() noexcept;
    /// Standard normal via Box-Muller; pairs are cached.
    double normal() noexcept;
    /// Circularly symmetric complex Gaussian with E|z|^2 = 1.
    std::complex<double> complex_normal() noexcept;

private:
    void refill() noexcept;

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace rvq
