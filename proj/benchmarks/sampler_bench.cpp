// Copyright 2026 The PCO Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "pco/exploration.hpp"

namespace {

void BM_SuccessWeightedSample(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  std::vector<double> ema(k);
  for (std::size_t i = 0; i < k; ++i) ema[i] = static_cast<double>(i % 7) / 7.0;
  pco::Rng rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pco::success_weighted_sample(ema, 4, 0.5, rng));
  }
}
BENCHMARK(BM_SuccessWeightedSample)->Arg(16)->Arg(64)->Arg(256);

void BM_UniformSample(benchmark::State& state) {
  pco::Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(pco::uniform_sample(16, 4, rng));
}
BENCHMARK(BM_UniformSample);

void BM_ChooseRouteExplore(benchmark::State& state) {
  const std::vector<double> ema(16, 0.5);
  const pco::EncoderFn encoder = [](std::string_view) {
    return std::optional<std::vector<long long>>(std::vector<long long>{0, 1, 2, 3});
  };
  pco::Rng rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pco::choose_route(0.5, {4, 0.5}, pco::ExplorationMode::success_weighted,
                                               ema, encoder, "x", rng));
  }
}
BENCHMARK(BM_ChooseRouteExplore);

}  // namespace
