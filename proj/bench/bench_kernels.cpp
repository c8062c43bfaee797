// Copyright 2026 The memsim Authors.
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

#include <random>

#include "memsim/crossbar.hpp"
#include "memsim/dataset.hpp"
#include "memsim/network.hpp"
#include "memsim/training.hpp"

namespace {

using namespace memsim;

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.data()) v = u(rng);
  return m;
}

void BM_MvmReference(benchmark::State& state) {
  Rng rng(1);
  const auto slices = static_cast<std::size_t>(state.range(0));
  const CrossbarTile tile = map_weights(random_matrix(128, 128, rng), pcm_preset(), ConverterSpec{}, slices, rng);
  const std::vector<double> x(128, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(mvm_reference(tile, x, 0.0, rng));
}
BENCHMARK(BM_MvmReference)->Arg(1)->Arg(8)->Arg(16);

void BM_MvmFast(benchmark::State& state) {
  Rng rng(1);
  const auto slices = static_cast<std::size_t>(state.range(0));
  const CrossbarTile tile = map_weights(random_matrix(128, 128, rng), pcm_preset(), ConverterSpec{}, slices, rng);
  const TileReadout ro = make_readout(tile, 0.0);
  const std::vector<double> x(128, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(mvm(ro, x, rng));
}
BENCHMARK(BM_MvmFast)->Arg(1)->Arg(8)->Arg(16);

void BM_MapWeights(benchmark::State& state) {
  Rng rng(2);
  const Matrix w = random_matrix(128, 128, rng);
  for (auto _ : state) benchmark::DoNotOptimize(map_weights(w, pcm_preset(), ConverterSpec{}, 8, rng));
}
BENCHMARK(BM_MapWeights);

void BM_ForwardBatch(benchmark::State& state) {
  const Execution exec = state.range(0) ? Execution::Parallel : Execution::Serial;
  Rng rng(3);
  AnalogNetwork net = make_network(NetworkSpec{}, AnalogConfig{}, rng);
  reprogram(net, rng);
  const NetworkReadout ro = make_readout(net, 0.0);
  const Matrix x = input_matrix(generate_dataset(256, OracleParams{}, 4));
  std::vector<std::size_t> rows(256);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(forward_batch(net, &ro, x, rows, ++seed, exec));
  state.SetLabel(exec == Execution::Parallel ? "parallel" : "serial");
}
BENCHMARK(BM_ForwardBatch)->Arg(0)->Arg(1);

void BM_BackwardBatch(benchmark::State& state) {
  const Execution exec = state.range(0) ? Execution::Parallel : Execution::Serial;
  Rng rng(5);
  const AnalogNetwork net = make_network(NetworkSpec{}, AnalogConfig{}, rng);
  const Dataset d = generate_dataset(256, OracleParams{}, 6);
  const Matrix x = input_matrix(d), y = target_matrix(d);
  std::vector<std::size_t> rows(256);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const auto traces = forward_batch(net, nullptr, x, rows, 0, Execution::Serial);
  for (auto _ : state) benchmark::DoNotOptimize(backward_batch(net, traces, y, exec));
  state.SetLabel(exec == Execution::Parallel ? "parallel" : "serial");
}
BENCHMARK(BM_BackwardBatch)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
