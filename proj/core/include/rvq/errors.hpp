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

#include <stdexcept>
#include <string>

namespace rvq {

/// Precondition violated by a caller-supplied argument.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite or otherwise unusable matrix input.
class InvalidMatrix : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Codebook size above the configured 2^B guard.
class CapacityExceeded : public std::runtime_error {
public:
    CapacityExceeded(int bits, int guard)
        : std::runtime_error("codebook of 2^" + std::to_string(bits) +
                             " entries exceeds guard max_bits=" + std::to_string(guard)),
          bits_(bits), guard_(guard) {}
    int bits() const noexcept { return bits_; }
    int guard() const noexcept { return guard_; }

private:
    int bits_;
    int guard_;
};

/// Formula requested outside the regime it is stated for.
class UnsupportedRegime : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Root finder or quadrature failed to reach its tolerance.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Experiment configuration rejected (CLI exit code 3).
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

}  // namespace rvq
