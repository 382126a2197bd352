/*
 * Copyright 2026 The MCRD Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Ranking and metric computation over large vocabularies.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "mcrd/channels.hpp"
#include "mcrd/evaluator.hpp"

namespace {

std::vector<double> RandomScores(std::size_t n) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  std::vector<double> s(n);
  for (double& x : s) x = normal(rng);
  return s;
}

void BM_Rank(benchmark::State& state) {
  const auto scores = RandomScores(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mcrd::Rank(scores).data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Rank)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)
    ->Complexity(benchmark::oNLogN);

void BM_RankOfTarget(benchmark::State& state) {
  const auto scores = RandomScores(state.range(0));
  std::size_t target = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mcrd::RankOfTarget(scores, target));
    target = (target + 7919) % scores.size();
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RankOfTarget)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)
    ->Complexity(benchmark::oN);

void BM_Metrics(benchmark::State& state) {
  std::mt19937_64 rng(6);
  std::vector<std::size_t> ranks(state.range(0));
  for (auto& r : ranks) r = rng() % 5000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mcrd::Metrics(ranks).rank_std);
  }
}
BENCHMARK(BM_Metrics)->Arg(1000)->Arg(100000);

}  // namespace
