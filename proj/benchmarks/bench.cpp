// Copyright 2026 The drivestyle Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>

#include <benchmark/benchmark.h>

#include "drivestyle/distributions.hpp"
#include "drivestyle/fragmentation.hpp"
#include "drivestyle/hlm.hpp"
#include "drivestyle/synthgen.hpp"

namespace ds = drivestyle;

static void BM_GibbsSweep(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const auto h = ds::Hyperparams::make_symmetric(K, 125, 50.0 / K, 0.1);
  const auto g = ds::generate_corpus(h, std::vector<int>(100, 500), 1);
  auto corpus = std::make_shared<const ds::WordCorpus>(g.corpus);
  auto s = ds::init_state(corpus, h, 1);
  for (auto _ : state) ds::gibbs_sweep(s, h);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corpus->token_count()));
}
BENCHMARK(BM_GibbsSweep)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

static void BM_JointLogProb(benchmark::State& state) {
  const auto h = ds::Hyperparams::make_symmetric(3, 125, 50.0 / 3, 0.1);
  const auto g = ds::generate_corpus(h, std::vector<int>(100, 500), 1);
  for (auto _ : state) benchmark::DoNotOptimize(ds::exact_joint_log_prob(g.corpus, g.z, h));
}
BENCHMARK(BM_JointLogProb)->Unit(benchmark::kMicrosecond);

static void BM_FitCandidates(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto law = ds::make_gev(0.0, 1.0, 0.2);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (auto& v : x) v = ds::sample(law, rng);
  for (auto _ : state) benchmark::DoNotOptimize(ds::fit_candidates(x));
}
BENCHMARK(BM_FitCandidates)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_FragmentStats(benchmark::State& state) {
  const auto d = ds::simulate_driver({0.3, 0.4, 0.3}, ds::default_profile_set(), 1800.0, 5);
  ds::FragmentConfig cfg;
  for (auto _ : state) {
    const auto frags = ds::segment(d.series, cfg);
    benchmark::DoNotOptimize(ds::fragment_stats(frags, cfg));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.series.size()));
}
BENCHMARK(BM_FragmentStats)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
