// Copyright 2026 The r2tk Authors
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

#include <numeric>
#include <random>
#include <vector>

#include "r2tk/checkpoint.hpp"
#include "r2tk/linalg.hpp"
#include "r2tk/renyi.hpp"
#include "r2tk/synth.hpp"
#include "r2tk/trainer.hpp"

namespace {

using namespace r2tk;

std::vector<double> random_psd(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> b(n * n), a(n * n, 0.0);
  for (double& v : b) v = g(rng);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) a[i * n + j] += b[i * n + k] * b[j * n + k];
  return a;
}

void BM_JacobiEigen(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_psd(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(jacobi_eigen(a, n));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_JacobiEigen)->RangeMultiplier(2)->Range(8, 64)->Complexity();

void BM_EntropyEstimate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_psd(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_entropy(a, n, 1.01));
}
BENCHMARK(BM_EntropyEstimate)->Arg(8)->Arg(24)->Arg(64);

void BM_EncodeCheckpoint(benchmark::State& state) {
  const NamedTensors named = named_from_params(init_params(ModelConfig{}, 0));
  for (auto _ : state) benchmark::DoNotOptimize(encode_checkpoint(named));
}
BENCHMARK(BM_EncodeCheckpoint);

void BM_TrainStep(benchmark::State& state) {
  const ModelConfig model;
  TrainConfig config;
  config.batch_size = static_cast<std::size_t>(state.range(0));
  config.bdmm_enabled = state.range(1) != 0;
  const Dataset data = generate(SynthSpec{});
  std::vector<std::size_t> idx(config.batch_size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const Batch batch = make_batch(data.train, idx, model);
  Params params = init_params(model, 0);
  SgdState sgd;
  std::size_t step = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_step(batch, params, sgd, model, config, step));
    step = (step + 1) % config.total_steps;
  }
}
BENCHMARK(BM_TrainStep)->Args({8, 0})->Args({8, 1})->Args({24, 1})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
