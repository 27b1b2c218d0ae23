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
#include <optional>

#include "rvq/harness.hpp"

namespace rvq::harness {

/// Knobs that trade run time for accuracy without changing what a preset
/// reproduces. Unset fields keep the preset default.
struct PresetOptions {
    std::optional<int> trials;        ///< Monte Carlo trials per grid point
    std::optional<int> sigma_trials;  ///< channels for the variance estimate
    std::optional<int> sigma_n_t;     ///< system size for the variance estimate
};

/// Fully specified configuration for one of the figure presets.
/// Throws ConfigError for Preset::custom.
ExperimentConfig make_preset(Preset preset, std::uint64_t seed, const PresetOptions& opts = {});

}  // namespace rvq::harness
