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
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mcrd/channels.hpp"
#include "mcrd/config.hpp"
#include "mcrd/encoder.hpp"
#include "mcrd/graph.hpp"
#include "mcrd/lexicon.hpp"
#include "mcrd/params.hpp"

namespace mcrd {

/// Vocabulary, embeddings and feature table, loaded once and shared
/// read-only.
struct Lexicon {
  Vocabulary vocab;
  EmbeddingMatrix embeddings;
  WordFeatureTable features;
  std::string embeddings_hash;
  std::string features_hash;

  /// An empty `features` path yields an empty registry (word channel only).
  static Lexicon Load(const std::filesystem::path& embeddings,
                      const std::filesystem::path& features);
  static Lexicon FromParts(Embeddings embeddings, WordFeatureTable features);
};

struct QueryForward {
  EncodedQuery encoded;
  std::array<std::optional<ChannelNodes>, kChannelCount> channels;
  std::array<std::optional<ad::NodeId>, kChannelCount> per_word;
  ad::NodeId fused = 0;
};

/// Dropout-free scores for one query.
struct ScoredQuery {
  std::vector<double> fused;
  /// Per-word confidences; empty for inactive channels.
  std::array<std::vector<double>, kChannelCount> per_word;
  /// Fusion weight applied to each channel; 0 for inactive ones.
  std::array<double, kChannelCount> weights{};
};

/// The multi-channel scorer: encoder, channel predictors and fusion over a
/// shared lexicon.
class Model {
 public:
  Model(std::shared_ptr<const Lexicon> lexicon, EncoderConfig encoder,
        ChannelWeights weights, ModelParams params);

  /// Fresh Glorot-initialized parameters drawn from `rng`.
  static Model Initialize(std::shared_ptr<const Lexicon> lexicon,
                          EncoderConfig encoder, ChannelWeights weights,
                          std::mt19937_64& rng);

  const Lexicon& lexicon() const { return *lexicon_; }
  std::shared_ptr<const Lexicon> shared_lexicon() const { return lexicon_; }
  const EncoderConfig& encoder() const { return encoder_; }
  const ChannelWeights& weights() const { return weights_; }
  const FeatureMaps& maps() const { return maps_; }
  const std::array<bool, kChannelCount>& active() const { return active_; }
  bool is_active(Channel c) const {
    return active_[static_cast<std::size_t>(c)];
  }
  const ModelParams& params() const { return params_; }
  ModelParams& mutable_params() { return params_; }

  /// Builds the full scoring graph for one padded row.
  QueryForward Forward(ad::Graph& g, const Binding& binding,
                       std::span<const std::size_t> tokens,
                       std::span<const std::uint8_t> mask,
                       std::mt19937_64* dropout_rng) const;

  ScoredQuery Score(std::span<const std::size_t> tokens) const;
  ScoredQuery Score(std::string_view text) const;

 private:
  std::shared_ptr<const Lexicon> lexicon_;
  EncoderConfig encoder_;
  ChannelWeights weights_;
  ModelParams params_;
  FeatureMaps maps_;
  std::array<bool, kChannelCount> active_{};
};

}  // namespace mcrd
