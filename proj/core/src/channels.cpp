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

#include "mcrd/channels.hpp"

#include <algorithm>
#include <numeric>

#include "mcrd/errors.hpp"
#include "mcrd/ops.hpp"

namespace mcrd {
namespace {

template <typename Select>
std::shared_ptr<const SparseMatrix> Incidence(const WordFeatureTable& table,
                                              std::size_t cols,
                                              Select select) {
  SparseBuilder b(cols);
  for (std::size_t w = 0; w < table.vocab_size(); ++w) {
    for (std::size_t j : select(table.features(w))) b.Add(j, 1.0);
    b.EndRow();
  }
  return std::make_shared<const SparseMatrix>(std::move(b).Build());
}

ChannelNodes PooledChannel(ad::Graph& g, const Binding& binding,
                           ad::NodeId hidden_matrix,
                           std::span<const std::uint8_t> mask,
                           const char* weight, const char* bias,
                           const std::shared_ptr<const SparseMatrix>& map) {
  ChannelNodes out;
  out.local = ad::AffineRows(g, binding.at(weight), hidden_matrix,
                             binding.at(bias));
  ad::PoolResult pooled = ad::MaskedMaxPool(g, *out.local, mask);
  out.scores = pooled.pooled;
  out.argmax = std::move(pooled.argmax);
  out.per_word = ad::SparseMatVec(g, map, out.scores);
  return out;
}

}  // namespace

const char* ChannelName(Channel c) {
  switch (c) {
    case Channel::kWord: return "word";
    case Channel::kPos: return "pos";
    case Channel::kMorpheme: return "mor";
    case Channel::kCategory: return "cat";
    case Channel::kSememe: return "sem";
  }
  return "unknown";
}

double ChannelWeight(const ChannelWeights& w, Channel c) {
  switch (c) {
    case Channel::kWord: return w.word;
    case Channel::kPos: return w.pos;
    case Channel::kMorpheme: return w.mor;
    case Channel::kCategory: return w.cat;
    case Channel::kSememe: return w.sem;
  }
  return 0.0;
}

FeatureMaps BuildFeatureMaps(const WordFeatureTable& table,
                             const ChannelWeights& weights) {
  const FeatureRegistry& r = table.registry();
  FeatureMaps maps;
  maps.pos = Incidence(table, r.pos.size(),
                       [](const WordFeatures& f) { return f.pos; });
  maps.morpheme = Incidence(table, r.morphemes.size(),
                            [](const WordFeatures& f) { return f.morphemes; });
  maps.sememe = Incidence(table, r.sememes.size(),
                          [](const WordFeatures& f) { return f.sememes; });

  std::size_t total = 0;
  for (std::size_t c : r.category_layers) {
    maps.category_offsets.push_back(total);
    total += c;
  }
  SparseBuilder b(total);
  for (std::size_t w = 0; w < table.vocab_size(); ++w) {
    const auto& cats = table.features(w).categories;
    for (std::size_t k = 0; k < cats.size(); ++k) {
      if (cats[k]) b.Add(maps.category_offsets[k] + *cats[k], weights.BetaFor(k));
    }
    b.EndRow();
  }
  maps.category = std::make_shared<const SparseMatrix>(std::move(b).Build());
  return maps;
}

std::array<bool, kChannelCount> ActiveChannels(const FeatureRegistry& registry,
                                               const ChannelWeights& weights) {
  std::array<bool, kChannelCount> active{};
  active[static_cast<std::size_t>(Channel::kWord)] = weights.word != 0.0;
  active[static_cast<std::size_t>(Channel::kPos)] =
      weights.pos != 0.0 && !registry.pos.empty();
  active[static_cast<std::size_t>(Channel::kMorpheme)] =
      weights.mor != 0.0 && !registry.morphemes.empty();
  active[static_cast<std::size_t>(Channel::kCategory)] =
      weights.cat != 0.0 && registry.layer_count() > 0;
  active[static_cast<std::size_t>(Channel::kSememe)] =
      weights.sem != 0.0 && !registry.sememes.empty();
  return active;
}

ad::NodeId ScoreWord(ad::Graph& g, const Binding& binding, ad::NodeId sentence,
                     const EmbeddingMatrix& embeddings) {
  const ad::NodeId projected =
      ad::Affine(g, binding.at(names::kWordWeight), sentence,
                 binding.at(names::kWordBias));
  return ad::FixedMatVec(g, embeddings.shared(), projected);
}

ChannelNodes ScorePos(ad::Graph& g, const Binding& binding,
                      ad::NodeId sentence, const FeatureMaps& maps) {
  ChannelNodes out;
  out.scores = ad::Affine(g, binding.at(names::kPosWeight), sentence,
                          binding.at(names::kPosBias));
  out.per_word = ad::SparseMatVec(g, maps.pos, out.scores);
  return out;
}

ChannelNodes ScoreMorpheme(ad::Graph& g, const Binding& binding,
                           ad::NodeId hidden_matrix,
                           std::span<const std::uint8_t> mask,
                           const FeatureMaps& maps) {
  return PooledChannel(g, binding, hidden_matrix, mask, names::kMorphemeWeight,
                       names::kMorphemeBias, maps.morpheme);
}

ChannelNodes ScoreSememe(ad::Graph& g, const Binding& binding,
                         ad::NodeId hidden_matrix,
                         std::span<const std::uint8_t> mask,
                         const FeatureMaps& maps) {
  return PooledChannel(g, binding, hidden_matrix, mask, names::kSememeWeight,
                       names::kSememeBias, maps.sememe);
}

ChannelNodes ScoreCategory(ad::Graph& g, const Binding& binding,
                           ad::NodeId sentence, const FeatureMaps& maps,
                           std::size_t layers) {
  if (layers == 0) throw ValidationError("category channel needs K >= 1");
  ChannelNodes out;
  for (std::size_t k = 1; k <= layers; ++k) {
    out.layer_scores.push_back(ad::Affine(g, binding.at(names::CategoryWeight(k)),
                                          sentence,
                                          binding.at(names::CategoryBias(k))));
  }
  out.scores = out.layer_scores[0];
  for (std::size_t k = 1; k < layers; ++k) {
    out.scores = ad::Concat(g, out.scores, out.layer_scores[k]);
  }
  out.per_word = ad::SparseMatVec(g, maps.category, out.scores);
  return out;
}

ad::NodeId Fuse(ad::Graph& g, std::span<const FusionTerm> terms) {
  std::vector<FusionTerm> ordered(terms.begin(), terms.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const FusionTerm& a, const FusionTerm& b) {
                     return a.channel < b.channel;
                   });
  std::vector<ad::NodeId> inputs;
  std::vector<double> coeffs;
  for (const auto& t : ordered) {
    inputs.push_back(t.per_word);
    coeffs.push_back(t.weight);
  }
  return ad::LinearCombination(g, inputs, coeffs);
}

std::vector<double> Fuse(std::span<const std::span<const double>> per_word,
                         std::span<const double> weights) {
  if (per_word.size() != weights.size() || per_word.empty()) {
    throw DimensionError("fuse: " + std::to_string(per_word.size()) +
                         " channels, " + std::to_string(weights.size()) +
                         " weights");
  }
  std::vector<double> fused(per_word[0].size(), 0.0);
  for (std::size_t c = 0; c < per_word.size(); ++c) {
    if (per_word[c].size() != fused.size()) {
      throw DimensionError("fuse: channel lengths differ");
    }
    for (std::size_t w = 0; w < fused.size(); ++w) {
      fused[w] += weights[c] * per_word[c][w];
    }
  }
  return fused;
}

std::vector<std::size_t> Rank(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  return order;
}

}  // namespace mcrd
