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

#include "mcrd/model.hpp"

#include <algorithm>

#include "mcrd/errors.hpp"

namespace mcrd {

Lexicon Lexicon::Load(const std::filesystem::path& embeddings,
                      const std::filesystem::path& features) {
  Embeddings e = LoadEmbeddings(embeddings);
  WordFeatureTable table = features.empty()
                               ? WordFeatureTable({}, e.vocab.size())
                               : LoadFeatureTable(features, e.vocab);
  return FromParts(std::move(e), std::move(table));
}

Lexicon Lexicon::FromParts(Embeddings embeddings, WordFeatureTable features) {
  if (features.vocab_size() != embeddings.vocab.size()) {
    throw ValidationError("feature table covers " +
                          std::to_string(features.vocab_size()) +
                          " words, vocabulary has " +
                          std::to_string(embeddings.vocab.size()));
  }
  Lexicon lex{std::move(embeddings.vocab), std::move(embeddings.matrix),
              std::move(features), {}, {}};
  lex.embeddings_hash = EmbeddingsHash(lex.vocab, lex.embeddings);
  lex.features_hash = FeatureTableHash(lex.features, lex.vocab);
  return lex;
}

Model::Model(std::shared_ptr<const Lexicon> lexicon, EncoderConfig encoder,
             ChannelWeights weights, ModelParams params)
    : lexicon_(std::move(lexicon)),
      encoder_(encoder),
      weights_(std::move(weights)),
      params_(std::move(params)) {
  encoder_.Validate();
  weights_.Validate();
  if (encoder_.input_dim != lexicon_->embeddings.dim()) {
    throw ValidationError("encoder input_dim " +
                          std::to_string(encoder_.input_dim) +
                          " does not match embedding dim " +
                          std::to_string(lexicon_->embeddings.dim()));
  }
  const FeatureRegistry& registry = lexicon_->features.registry();
  if (!weights_.beta.empty() &&
      weights_.beta.size() != registry.layer_count()) {
    throw ValidationError("beta lists " + std::to_string(weights_.beta.size()) +
                          " layers, feature table has " +
                          std::to_string(registry.layer_count()));
  }
  maps_ = BuildFeatureMaps(lexicon_->features, weights_);
  active_ = ActiveChannels(registry, weights_);
  if (std::none_of(active_.begin(), active_.end(), [](bool b) { return b; })) {
    throw ValidationError("no channel is active for this feature table");
  }
}

Model Model::Initialize(std::shared_ptr<const Lexicon> lexicon,
                        EncoderConfig encoder, ChannelWeights weights,
                        std::mt19937_64& rng) {
  encoder.input_dim = lexicon->embeddings.dim();
  ModelParams params =
      InitParams(encoder, lexicon->features.registry(), rng);
  return Model(std::move(lexicon), encoder, std::move(weights),
               std::move(params));
}

QueryForward Model::Forward(ad::Graph& g, const Binding& binding,
                            std::span<const std::size_t> tokens,
                            std::span<const std::uint8_t> mask,
                            std::mt19937_64* dropout_rng) const {
  QueryForward out;
  out.encoded = EncodeQuery(g, binding, tokens, mask, lexicon_->embeddings,
                            encoder_, dropout_rng);
  const std::vector<std::uint8_t> valid(out.encoded.length, 1);
  const ad::NodeId v = out.encoded.sentence;

  std::vector<FusionTerm> terms;
  for (Channel c : kAllChannels) {
    if (!is_active(c)) continue;
    const auto i = static_cast<std::size_t>(c);
    switch (c) {
      case Channel::kWord:
        out.per_word[i] = ScoreWord(g, binding, v, lexicon_->embeddings);
        break;
      case Channel::kPos:
        out.channels[i] = ScorePos(g, binding, v, maps_);
        break;
      case Channel::kMorpheme:
        out.channels[i] = ScoreMorpheme(g, binding, out.encoded.hidden_matrix,
                                        valid, maps_);
        break;
      case Channel::kCategory:
        out.channels[i] =
            ScoreCategory(g, binding, v, maps_,
                          lexicon_->features.registry().layer_count());
        break;
      case Channel::kSememe:
        out.channels[i] = ScoreSememe(g, binding, out.encoded.hidden_matrix,
                                      valid, maps_);
        break;
    }
    if (out.channels[i]) out.per_word[i] = out.channels[i]->per_word;
    terms.push_back({c, *out.per_word[i], ChannelWeight(weights_, c)});
  }
  out.fused = Fuse(g, terms);
  return out;
}

ScoredQuery Model::Score(std::span<const std::size_t> tokens) const {
  ad::Graph g;
  const Binding binding = Bind(g, params_, false);
  const std::vector<std::uint8_t> mask(tokens.size(), 1);
  const QueryForward fwd = Forward(g, binding, tokens, mask, nullptr);
  ScoredQuery out;
  const auto& fused = g.value(fwd.fused).values();
  out.fused.assign(fused.begin(), fused.end());
  for (Channel c : kAllChannels) {
    const auto i = static_cast<std::size_t>(c);
    if (!fwd.per_word[i]) continue;
    const auto& v = g.value(*fwd.per_word[i]).values();
    out.per_word[i].assign(v.begin(), v.end());
    out.weights[i] = ChannelWeight(weights_, c);
  }
  return out;
}

ScoredQuery Model::Score(std::string_view text) const {
  return Score(Tokenize(text, lexicon_->vocab));
}

}  // namespace mcrd
