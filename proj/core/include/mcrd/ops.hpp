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
#include <memory>
#include <span>
#include <vector>

#include "mcrd/graph.hpp"
#include "mcrd/tensor.hpp"

// Differentiable operations. Each computes its value eagerly and records a
// backward closure on the graph. Shape violations raise DimensionError.
namespace mcrd::ad {

/// y = W x + b with W [m x n], x [n], b [m].
NodeId Affine(Graph& g, NodeId weight, NodeId input, NodeId bias);

/// Row-wise affine map: Y[t] = W X[t] + b, X [T x n] -> Y [T x m].
NodeId AffineRows(Graph& g, NodeId weight, NodeId rows, NodeId bias);

/// y = A x with A [m x n].
NodeId MatVec(Graph& g, NodeId matrix, NodeId input);

/// Gate weights for one LSTM direction. The weight maps [x; h_prev] to the
/// stacked pre-activations of the input, forget, output and candidate gates,
/// in that order: shape [4l x (d + l)], bias [4l].
struct LstmWeights {
  NodeId weight;
  NodeId bias;
};

struct LstmState {
  NodeId h;
  NodeId c;
};

LstmState LstmStep(Graph& g, const LstmWeights& weights, NodeId input,
                   NodeId h_prev, NodeId c_prev);

NodeId Slice(Graph& g, NodeId input, std::size_t offset, std::size_t length);
NodeId Concat(Graph& g, NodeId first, NodeId second);
NodeId Dot(Graph& g, NodeId a, NodeId b);

/// y = A x for a fixed, shared matrix; no gradient flows into A.
NodeId FixedMatVec(Graph& g, std::shared_ptr<const Tensor> matrix,
                   NodeId input);

/// Stacks equally sized vectors into a [T x k] matrix.
NodeId StackRows(Graph& g, std::span<const NodeId> rows);

/// v = sum_t weights[t] * M[t], M [T x k], weights [T].
NodeId WeightedRowSum(Graph& g, NodeId matrix, NodeId weights);

/// Softmax over the entries whose mask value is nonzero (all entries when the
/// mask is empty); masked entries get probability 0.
NodeId Softmax(Graph& g, NodeId logits,
               std::span<const std::uint8_t> mask = {});

struct PoolResult {
  NodeId pooled;
  std::vector<std::size_t> argmax;
};

/// Column-wise max over the rows whose mask entry is nonzero. Ties go to the
/// lowest row index, and the gradient flows to the selected row only.
PoolResult MaskedMaxPool(Graph& g, NodeId rows,
                         std::span<const std::uint8_t> mask);

/// y = S x for a fixed sparse S; no gradient flows into S.
NodeId SparseMatVec(Graph& g, std::shared_ptr<const SparseMatrix> matrix,
                    NodeId input);

/// y = sum_k coeffs[k] * inputs[k], accumulated left to right.
NodeId LinearCombination(Graph& g, std::span<const NodeId> inputs,
                         std::span<const double> coeffs);

/// Elementwise product with a fixed tensor (dropout masks).
NodeId MultiplyConstant(Graph& g, NodeId input, Tensor factors);

/// -log softmax(logits)[target], stabilized by max subtraction.
NodeId SoftmaxCrossEntropy(Graph& g, NodeId logits, std::size_t target);

/// sum_w BCE(sigmoid(logits[w]), [w == target]).
NodeId SigmoidCrossEntropy(Graph& g, NodeId logits, std::size_t target);

}  // namespace mcrd::ad
