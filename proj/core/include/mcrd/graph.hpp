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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mcrd/tensor.hpp"

namespace mcrd::ad {

using NodeId = std::size_t;

enum class OpKind {
  kConstant,
  kParameter,
  kAffine,
  kAffineRows,
  kMatVec,
  kFixedMatVec,
  kLstmStep,
  kSlice,
  kConcat,
  kDot,
  kStackRows,
  kWeightedRowSum,
  kSoftmax,
  kMaskedMaxPool,
  kSparseMatVec,
  kLinearCombination,
  kMultiplyConstant,
  kSoftmaxCrossEntropy,
  kSigmoidCrossEntropy,
};

const char* OpName(OpKind op);

class Graph;

/// Propagates the node's gradient into its parents' gradients.
using BackwardFn = std::function<void(Graph&, NodeId)>;

struct Node {
  NodeId id = 0;
  OpKind op = OpKind::kConstant;
  std::vector<NodeId> parents;
  Tensor value;
  Tensor grad;  // allocated on first accumulation
  bool requires_grad = false;
  BackwardFn backward;
};

/// Append-only computation tape. Node ids are assigned in creation order, so
/// the node vector is already topologically sorted.
class Graph {
 public:
  NodeId Constant(Tensor value);
  /// Registers a trainable leaf. Names must be unique within one graph.
  NodeId Parameter(const std::string& name, Tensor value);

  NodeId AddNode(OpKind op, std::vector<NodeId> parents, Tensor value,
                 BackwardFn backward);

  const Node& node(NodeId id) const { return nodes_.at(id); }
  const Tensor& value(NodeId id) const { return nodes_.at(id).value; }
  /// Gradient of the last Backward() call; zeros if none reached this node.
  Tensor grad(NodeId id) const;
  bool requires_grad(NodeId id) const { return nodes_.at(id).requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Zero-initialized on first use; only valid during Backward().
  Tensor& GradAccumulator(NodeId id);

  /// Reverse sweep from a scalar node. Visits nodes in exact reverse creation
  /// order and records the visit order for inspection.
  void Backward(NodeId loss);
  const std::vector<NodeId>& last_backward_order() const {
    return backward_order_;
  }

  const std::map<std::string, NodeId>& parameters() const {
    return parameters_;
  }
  /// d(loss)/d(parameter) for every registered parameter, zero when unused.
  std::map<std::string, Tensor> ParameterGradients() const;

 private:
  std::vector<Node> nodes_;
  std::map<std::string, NodeId> parameters_;
  std::vector<NodeId> backward_order_;
};

}  // namespace mcrd::ad
