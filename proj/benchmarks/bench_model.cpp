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

// Forward scoring and one training step at a few model sizes.

#include <memory>
#include <random>
#include <sstream>
#include <string>

#include <benchmark/benchmark.h>

#include "mcrd/model.hpp"
#include "mcrd/optimizer.hpp"
#include "mcrd/synthetic.hpp"
#include "mcrd/trainer.hpp"

namespace {

using namespace mcrd;

struct Setup {
  std::shared_ptr<const Lexicon> lexicon;
  DefinitionDataset train;
  std::unique_ptr<Model> model;
};

Setup MakeSetup(std::size_t words, std::size_t dim) {
  SyntheticOptions so;
  so.words = words;
  so.dim = dim;
  so.pos_tags = 4;
  so.morphemes = 64;
  so.sememes = 64;
  const SyntheticCorpus corpus = GenerateCorpus(so);
  Setup s;
  s.lexicon = std::make_shared<const Lexicon>(
      Lexicon::FromParts(corpus.embeddings, corpus.features));
  std::string tsv;
  for (const auto& [w, text] : corpus.train_pairs) tsv += w + "\t" + text + "\n";
  std::istringstream in(tsv);
  s.train = ParseDataset(in, s.lexicon->vocab);
  EncoderConfig enc;
  enc.input_dim = dim;
  enc.hidden = dim;
  std::mt19937_64 rng(1);
  s.model = std::make_unique<Model>(
      Model::Initialize(s.lexicon, enc, ChannelWeights{}, rng));
  return s;
}

void BM_ScoreQuery(benchmark::State& state) {
  const Setup s = MakeSetup(state.range(0), state.range(1));
  const auto& tokens = s.train.entries.front().tokens;
  for (auto _ : state) {
    benchmark::DoNotOptimize(s.model->Score(tokens).fused.data());
  }
  state.counters["vocab"] = static_cast<double>(s.lexicon->vocab.size());
}
BENCHMARK(BM_ScoreQuery)->Args({200, 16})->Args({2000, 32})->Args({2000, 64})
    ->Unit(benchmark::kMicrosecond);

void BM_TrainStep(benchmark::State& state) {
  Setup s = MakeSetup(state.range(0), state.range(1));
  const auto batches =
      MakeBatches(s.train, 32, 1, s.lexicon->vocab.pad_index());
  AdamState adam = MakeAdamState(s.model->params());
  std::mt19937_64 rng(2);
  for (auto _ : state) {
    ad::Graph g;
    const Binding b = Bind(g, s.model->params(), true);
    const ad::NodeId loss =
        BatchLoss(g, b, *s.model, batches.front(), LossMode::kSoftmax, &rng);
    g.Backward(loss);
    AdamStep(s.model->mutable_params(), g.ParameterGradients(), adam, 1e-3);
  }
  state.SetItemsProcessed(state.iterations() * batches.front().size());
}
BENCHMARK(BM_TrainStep)->Args({200, 16})->Args({2000, 32})
    ->Unit(benchmark::kMillisecond);

}  // namespace
