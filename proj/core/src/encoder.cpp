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

#include "mcrd/encoder.hpp"

#include <algorithm>

#include "mcrd/errors.hpp"
#include "mcrd/ops.hpp"

namespace mcrd {

Tensor DropoutMask(std::size_t size, double rate, std::mt19937_64& rng) {
  Tensor mask({size});
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  for (double& m : mask.values()) m = keep(rng) ? scale : 0.0;
  return mask;
}

AttentionNodes Attend(ad::Graph& g, ad::NodeId hidden_matrix,
                      ad::NodeId anchor, std::span<const std::uint8_t> mask,
                      AttentionMode mode) {
  if (std::none_of(mask.begin(), mask.end(),
                   [](std::uint8_t m) { return m != 0; })) {
    throw EmptyInputError("attention over an all-masked sequence");
  }
  const ad::NodeId scores = ad::MatVec(g, hidden_matrix, anchor);
  ad::NodeId alpha;
  if (mode == AttentionMode::kSoftmax) {
    alpha = ad::Softmax(g, scores, mask);
  } else if (std::all_of(mask.begin(), mask.end(),
                         [](std::uint8_t m) { return m != 0; })) {
    alpha = scores;
  } else {
    Tensor keep({mask.size()});
    for (std::size_t i = 0; i < mask.size(); ++i) keep[i] = mask[i] ? 1.0 : 0.0;
    alpha = ad::MultiplyConstant(g, scores, std::move(keep));
  }
  return {alpha, ad::WeightedRowSum(g, hidden_matrix, alpha)};
}

EncodedQuery EncodeQuery(ad::Graph& g, const Binding& binding,
                         std::span<const std::size_t> tokens,
                         std::span<const std::uint8_t> mask,
                         const EmbeddingMatrix& embeddings,
                         const EncoderConfig& config,
                         std::mt19937_64* dropout_rng) {
  if (tokens.size() != mask.size()) {
    throw DimensionError("encode: " + std::to_string(tokens.size()) +
                         " tokens with mask of length " +
                         std::to_string(mask.size()));
  }
  if (embeddings.dim() != config.input_dim) {
    throw DimensionError("encode: embeddings have dim " +
                         std::to_string(embeddings.dim()) +
                         ", encoder expects " +
                         std::to_string(config.input_dim));
  }
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (mask[i]) valid.push_back(tokens[i]);
  }
  if (valid.empty()) throw EmptyInputError("encode: no valid tokens");

  const bool dropout = dropout_rng != nullptr && config.dropout > 0.0;
  const std::size_t l = config.hidden;
  const std::size_t n = valid.size();

  std::vector<ad::NodeId> inputs;
  inputs.reserve(n);
  for (std::size_t tok : valid) {
    auto row = embeddings.Row(tok);
    Tensor x = Tensor::Vector({row.begin(), row.end()});
    if (dropout) {
      const Tensor keep = DropoutMask(x.size(), config.dropout, *dropout_rng);
      for (std::size_t k = 0; k < x.size(); ++k) x[k] *= keep[k];
    }
    inputs.push_back(g.Constant(std::move(x)));
  }

  const ad::LstmWeights fwd{binding.at(names::kLstmForwardWeight),
                            binding.at(names::kLstmForwardBias)};
  const ad::LstmWeights bwd{binding.at(names::kLstmBackwardWeight),
                            binding.at(names::kLstmBackwardBias)};
  const ad::NodeId zero = g.Constant(Tensor({l}));

  EncodedQuery out;
  out.length = n;
  out.forward.resize(n);
  out.backward.resize(n);
  ad::LstmState state{zero, zero};
  for (std::size_t t = 0; t < n; ++t) {
    state = ad::LstmStep(g, fwd, inputs[t], state.h, state.c);
    out.forward[t] = state.h;
  }
  state = {zero, zero};
  for (std::size_t t = n; t-- > 0;) {
    state = ad::LstmStep(g, bwd, inputs[t], state.h, state.c);
    out.backward[t] = state.h;
  }
  out.hidden.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    out.hidden[t] = ad::Concat(g, out.forward[t], out.backward[t]);
  }
  out.hidden_matrix = ad::StackRows(g, out.hidden);
  out.anchor = ad::Concat(g, out.forward[n - 1], out.backward[0]);

  const std::vector<std::uint8_t> all_valid(n, 1);
  const AttentionNodes att =
      Attend(g, out.hidden_matrix, out.anchor, all_valid, config.attention);
  out.alpha = att.alpha;
  out.sentence = att.sentence;
  if (dropout) {
    out.sentence = ad::MultiplyConstant(
        g, out.sentence, DropoutMask(2 * l, config.dropout, *dropout_rng));
  }
  return out;
}

AttentionResult Attend(const Tensor& hidden, const Tensor& anchor,
                       std::span<const std::uint8_t> mask, AttentionMode mode) {
  ad::Graph g;
  const AttentionNodes n =
      Attend(g, g.Constant(hidden), g.Constant(anchor), mask, mode);
  return {g.value(n.alpha), g.value(n.sentence)};
}

std::vector<EncoderState> Encode(const QueryBatch& batch,
                                 const ModelParams& params,
                                 const EncoderConfig& config,
                                 const EmbeddingMatrix& embeddings,
                                 bool training, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<EncoderState> states;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    ad::Graph g;
    const Binding binding = Bind(g, params, false);
    const EncodedQuery q =
        EncodeQuery(g, binding, batch.Row(i), batch.MaskRow(i), embeddings,
                    config, training ? &rng : nullptr);
    const std::size_t l = config.hidden;
    EncoderState s{Tensor({q.length, l}), Tensor({q.length, l}),
                   g.value(q.hidden_matrix), g.value(q.anchor),
                   g.value(q.alpha), g.value(q.sentence)};
    for (std::size_t t = 0; t < q.length; ++t) {
      const Tensor& f = g.value(q.forward[t]);
      const Tensor& b = g.value(q.backward[t]);
      std::copy(f.values().begin(), f.values().end(), s.h_forward.row(t).begin());
      std::copy(b.values().begin(), b.values().end(),
                s.h_backward.row(t).begin());
    }
    states.push_back(std::move(s));
  }
  return states;
}

}  // namespace mcrd
