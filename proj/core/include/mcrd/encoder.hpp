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

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mcrd/config.hpp"
#include "mcrd/graph.hpp"
#include "mcrd/lexicon.hpp"
#include "mcrd/params.hpp"
#include "mcrd/tensor.hpp"

namespace mcrd {

/// Graph nodes produced by encoding one query. Only valid (unmasked)
/// positions are encoded, so every per-position vector has length
/// `length`, the number of valid tokens.
struct EncodedQuery {
  std::size_t length = 0;
  std::vector<ad::NodeId> forward;   // l each
  std::vector<ad::NodeId> backward;  // l each
  std::vector<ad::NodeId> hidden;    // 2l each: [forward; backward]
  ad::NodeId hidden_matrix = 0;      // length x 2l
  ad::NodeId anchor = 0;             // [forward[last]; backward[first]]
  ad::NodeId alpha = 0;              // length
  ad::NodeId sentence = 0;           // v, 2l
};

struct AttentionNodes {
  ad::NodeId alpha;
  ad::NodeId sentence;
};

/// alpha_i = anchor . h_i (literal) or its softmax over valid rows; masked
/// rows get weight 0. v = sum_i alpha_i h_i.
AttentionNodes Attend(ad::Graph& g, ad::NodeId hidden_matrix,
                      ad::NodeId anchor, std::span<const std::uint8_t> mask,
                      AttentionMode mode);

/// BiLSTM-with-attention encoder over the valid tokens of one padded row.
/// Dropout (input embeddings and v) is applied only when `dropout_rng` is
/// non-null.
EncodedQuery EncodeQuery(ad::Graph& g, const Binding& binding,
                         std::span<const std::size_t> tokens,
                         std::span<const std::uint8_t> mask,
                         const EmbeddingMatrix& embeddings,
                         const EncoderConfig& config,
                         std::mt19937_64* dropout_rng);

/// Inverted-dropout keep mask scaled by 1 / (1 - rate).
Tensor DropoutMask(std::size_t size, double rate, std::mt19937_64& rng);

// Value-level views, mostly for inspection and tests.

struct EncoderState {
  Tensor h_forward;   // T x l
  Tensor h_backward;  // T x l
  Tensor h;           // T x 2l
  Tensor anchor;      // 2l
  Tensor alpha;       // T
  Tensor v;           // 2l
};

struct AttentionResult {
  Tensor alpha;
  Tensor v;
};

AttentionResult Attend(const Tensor& hidden, const Tensor& anchor,
                       std::span<const std::uint8_t> mask, AttentionMode mode);

/// Encodes every row of the batch; T is the row's valid length.
std::vector<EncoderState> Encode(const QueryBatch& batch,
                                 const ModelParams& params,
                                 const EncoderConfig& config,
                                 const EmbeddingMatrix& embeddings,
                                 bool training, std::uint64_t seed);

}  // namespace mcrd
