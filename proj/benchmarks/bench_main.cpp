/* Copyright 2026 The vqtk Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <benchmark/benchmark.h>

#include <random>

#include "vqtk/cluster.hpp"
#include "vqtk/experiments.hpp"
#include "vqtk/fsq.hpp"
#include "vqtk/metrics.hpp"
#include "vqtk/proposal.hpp"
#include "vqtk/vq.hpp"

namespace {

std::vector<float> normal_values(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g;
  std::vector<float> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

// args: codebook size, dim, threads
void BM_VqQuantize(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  const auto d = static_cast<std::uint32_t>(state.range(1));
  const auto threads = static_cast<unsigned>(state.range(2));
  const vqtk::Codebook book(n, d, normal_values(std::size_t{n} * d, 1));
  const vqtk::FeatureMap map(32, 32, d, normal_values(32 * 32 * d, 2));
  for (auto _ : state) benchmark::DoNotOptimize(vqtk::vq_quantize(map, book, threads));
  state.SetItemsProcessed(state.iterations() * map.positions());
}
BENCHMARK(BM_VqQuantize)
    ->Args({256, 16, 1})
    ->Args({1024, 32, 1})
    ->Args({8192, 32, 1})
    ->Args({8192, 32, 4})
    ->Unit(benchmark::kMillisecond);

void BM_FsqQuantize(benchmark::State& state) {
  const vqtk::FsqLevels levels({8, 8, 5, 5, 5});
  const vqtk::FeatureMap map(64, 64, 5, normal_values(64 * 64 * 5, 3));
  for (auto _ : state) benchmark::DoNotOptimize(vqtk::fsq_quantize(map, levels));
  state.SetItemsProcessed(state.iterations() * map.positions());
}
BENCHMARK(BM_FsqQuantize);

// args: k, batch size (0 = full batch)
void BM_KMeans(benchmark::State& state) {
  vqtk::VectorSet data;
  data.dim = 16;
  data.values = normal_values(20000 * 16, 4);
  vqtk::KMeansConfig cfg;
  cfg.k = static_cast<std::uint32_t>(state.range(0));
  cfg.max_iters = 20;
  cfg.tol = 0.0;
  if (state.range(1) > 0) cfg.batch_size = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(vqtk::kmeans_fit(data, cfg));
}
BENCHMARK(BM_KMeans)->Args({64, 0})->Args({64, 1024})->Args({256, 1024})->Unit(benchmark::kMillisecond);

void BM_FrechetDistance(benchmark::State& state) {
  const auto d = static_cast<std::uint32_t>(state.range(0));
  vqtk::VectorSet a, b;
  a.dim = b.dim = d;
  a.values = normal_values(std::size_t{4} * d * d, 5);
  b.values = normal_values(std::size_t{4} * d * d, 6);
  const auto sa = vqtk::gaussian_stats(a), sb = vqtk::gaussian_stats(b);
  for (auto _ : state) benchmark::DoNotOptimize(vqtk::frechet_distance(sa, sb));
}
BENCHMARK(BM_FrechetDistance)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_NgramFitAndPerplexity(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::uint32_t> code(0, 1023);
  std::vector<vqtk::TokenGrid> corpus;
  for (int g = 0; g < 64; ++g) {
    std::vector<std::uint32_t> c(256);
    for (auto& x : c) x = code(rng);
    corpus.emplace_back(16, 16, c);
  }
  for (auto _ : state) {
    const auto m = vqtk::NgramModel::fit(corpus, 2, 1024, 1.0);
    benchmark::DoNotOptimize(vqtk::perplexity(m, corpus));
  }
}
BENCHMARK(BM_NgramFitAndPerplexity)->Unit(benchmark::kMillisecond);

void BM_Demo(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(vqtk::run_demo({}, 0));
}
BENCHMARK(BM_Demo)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
