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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mcrd/config.hpp"
#include "mcrd/graph.hpp"
#include "mcrd/lexicon.hpp"
#include "mcrd/params.hpp"
#include "mcrd/tensor.hpp"

namespace mcrd {

enum class Channel : std::size_t { kWord, kPos, kMorpheme, kCategory, kSememe };
inline constexpr std::size_t kChannelCount = 5;
inline constexpr std::array<Channel, kChannelCount> kAllChannels = {
    Channel::kWord, Channel::kPos, Channel::kMorpheme, Channel::kCategory,
    Channel::kSememe};

/// Short name used in reports and JSON: word, pos, mor, cat, sem.
const char* ChannelName(Channel c);
double ChannelWeight(const ChannelWeights& w, Channel c);

/// Sparse word-by-feature incidence matrices. Row w of `pos` has a 1 in each
/// column p in P_w; `category` spans the concatenated layer logits with
/// beta_k at (w, offset_k + index_k(w)).
struct FeatureMaps {
  std::shared_ptr<const SparseMatrix> pos;
  std::shared_ptr<const SparseMatrix> morpheme;
  std::shared_ptr<const SparseMatrix> category;
  std::shared_ptr<const SparseMatrix> sememe;
  std::vector<std::size_t> category_offsets;
};

FeatureMaps BuildFeatureMaps(const WordFeatureTable& table,
                             const ChannelWeights& weights);

/// Channels that take part in fusion: a non-empty registry and a nonzero
/// weight. The word channel needs only a nonzero weight.
std::array<bool, kChannelCount> ActiveChannels(const FeatureRegistry& registry,
                                               const ChannelWeights& weights);

struct ChannelNodes {
  ad::NodeId scores = 0;    // characteristic scores: sc_pos, sc_mor, ...
  ad::NodeId per_word = 0;  // |W| confidences
  std::optional<ad::NodeId> local;       // T x |M| before pooling
  std::vector<std::size_t> argmax;       // pooled row per component
  std::vector<ad::NodeId> layer_scores;  // category channel only
};

/// sc_{w,word} = (W_word v + b_word) . w for every vocabulary row.
ad::NodeId ScoreWord(ad::Graph& g, const Binding& binding, ad::NodeId sentence,
                     const EmbeddingMatrix& embeddings);

ChannelNodes ScorePos(ad::Graph& g, const Binding& binding,
                      ad::NodeId sentence, const FeatureMaps& maps);

/// Local scores per valid position, column max-pooled, then summed over each
/// word's morphemes.
ChannelNodes ScoreMorpheme(ad::Graph& g, const Binding& binding,
                           ad::NodeId hidden_matrix,
                           std::span<const std::uint8_t> mask,
                           const FeatureMaps& maps);

ChannelNodes ScoreCategory(ad::Graph& g, const Binding& binding,
                           ad::NodeId sentence, const FeatureMaps& maps,
                           std::size_t layers);

ChannelNodes ScoreSememe(ad::Graph& g, const Binding& binding,
                         ad::NodeId hidden_matrix,
                         std::span<const std::uint8_t> mask,
                         const FeatureMaps& maps);

struct FusionTerm {
  Channel channel;
  ad::NodeId per_word;
  double weight;
};

/// sc_w = sum of weight * per_word over the terms, word channel first.
ad::NodeId Fuse(ad::Graph& g, std::span<const FusionTerm> terms);

/// Value-level fusion with the same accumulation order as the graph op.
std::vector<double> Fuse(std::span<const std::span<const double>> per_word,
                         std::span<const double> weights);

/// Indices by descending score, ties by ascending index.
std::vector<std::size_t> Rank(std::span<const double> scores);

}  // namespace mcrd
