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

#include <benchmark/benchmark.h>

#include <cmath>

#include "rvq/asymptotics.hpp"
#include "rvq/quantizer.hpp"
#include "rvq/randmat.hpp"

namespace {

using namespace rvq;

void BM_SampleSemiUnitary(benchmark::State& state) {
    const int n_t = static_cast<int>(state.range(0));
    const int k = static_cast<int>(state.range(1));
    auto rng = SeedPolicy(7).stream(0, StreamLabel::test);
    for (auto _ : state) benchmark::DoNotOptimize(randmat::sample_semi_unitary(n_t, k, rng));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SampleSemiUnitary)->Args({6, 1})->Args({12, 6})->Args({64, 32});

void BM_SelectEntry(benchmark::State& state) {
    const auto metric = static_cast<quantizer::Metric>(state.range(0));
    const int bits = static_cast<int>(state.range(1));
    const bool beam = metric == quantizer::Metric::beam_power;
    const randmat::SystemDims dims(12, 9, beam ? 1 : 6);
    auto rng = SeedPolicy(3).stream(0, StreamLabel::channel);
    const auto h = randmat::sample_channel(dims, rng);
    const auto cb = quantizer::generate_rvq_codebook(dims.n_t(), dims.k(), bits, SeedPolicy(3));
    for (auto _ : state) benchmark::DoNotOptimize(quantizer::select_entry(h, cb, 3.16, metric));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cb.size()));
}
BENCHMARK(BM_SelectEntry)
    ->Args({static_cast<int>(quantizer::Metric::beam_power), 10})
    ->Args({static_cast<int>(quantizer::Metric::optimal), 10})
    ->Args({static_cast<int>(quantizer::Metric::mf), 10})
    ->Args({static_cast<int>(quantizer::Metric::mmse), 10});

void BM_StreamedSelection(benchmark::State& state) {
    const int bits = static_cast<int>(state.range(0));
    const randmat::SystemDims dims(12, 9, 6);
    auto rng = SeedPolicy(5).stream(0, StreamLabel::channel);
    const auto h = randmat::sample_channel(dims, rng);
    const quantizer::RvqCodebookStream cb(12, 6, bits, SeedPolicy(5));
    for (auto _ : state)
        benchmark::DoNotOptimize(quantizer::select_entry(h, cb, 3.16, quantizer::Metric::optimal));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cb.size()));
}
BENCHMARK(BM_StreamedSelection)->Arg(8)->Arg(12);

void BM_MpIntegrate(benchmark::State& state) {
    const asymptotics::MPDensity g(0.5, randmat::GramSide::transmit);
    for (auto _ : state)
        benchmark::DoNotOptimize(asymptotics::mp_integrate(g, [](double x) { return std::log1p(10.0 * x); }));
}
BENCHMARK(BM_MpIntegrate);

void BM_VerifyBeamGain(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(asymptotics::verify_beam_gain(1.0, 0.3));
}
BENCHMARK(BM_VerifyBeamGain)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
