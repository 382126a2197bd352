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

#include "mcrd/graph.hpp"

#include "mcrd/errors.hpp"

namespace mcrd::ad {

const char* OpName(OpKind op) {
  switch (op) {
    case OpKind::kConstant: return "constant";
    case OpKind::kParameter: return "parameter";
    case OpKind::kAffine: return "affine";
    case OpKind::kAffineRows: return "affine_rows";
    case OpKind::kMatVec: return "matvec";
    case OpKind::kFixedMatVec: return "fixed_matvec";
    case OpKind::kLstmStep: return "lstm_step";
    case OpKind::kSlice: return "slice";
    case OpKind::kConcat: return "concat";
    case OpKind::kDot: return "dot";
    case OpKind::kStackRows: return "stack_rows";
    case OpKind::kWeightedRowSum: return "weighted_row_sum";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kMaskedMaxPool: return "masked_max_pool";
    case OpKind::kSparseMatVec: return "sparse_matvec";
    case OpKind::kLinearCombination: return "linear_combination";
    case OpKind::kMultiplyConstant: return "multiply_constant";
    case OpKind::kSoftmaxCrossEntropy: return "softmax_cross_entropy";
    case OpKind::kSigmoidCrossEntropy: return "sigmoid_cross_entropy";
  }
  return "unknown";
}

NodeId Graph::Constant(Tensor value) {
  return AddNode(OpKind::kConstant, {}, std::move(value), nullptr);
}

NodeId Graph::Parameter(const std::string& name, Tensor value) {
  if (parameters_.contains(name)) {
    throw Error("parameter '" + name + "' registered twice");
  }
  Node node;
  node.id = nodes_.size();
  node.op = OpKind::kParameter;
  node.value = std::move(value);
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  parameters_.emplace(name, nodes_.back().id);
  return nodes_.back().id;
}

NodeId Graph::AddNode(OpKind op, std::vector<NodeId> parents, Tensor value,
                      BackwardFn backward) {
  Node node;
  node.id = nodes_.size();
  node.op = op;
  for (NodeId p : parents) {
    if (p >= node.id) throw Error("parent id must precede child");
    node.requires_grad = node.requires_grad || nodes_[p].requires_grad;
  }
  node.parents = std::move(parents);
  node.value = std::move(value);
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return nodes_.back().id;
}

Tensor Graph::grad(NodeId id) const {
  const Node& n = nodes_.at(id);
  return n.grad.empty() ? Tensor::ZerosLike(n.value) : n.grad;
}

Tensor& Graph::GradAccumulator(NodeId id) {
  Node& n = nodes_.at(id);
  if (n.grad.empty()) n.grad = Tensor::ZerosLike(n.value);
  return n.grad;
}

void Graph::Backward(NodeId loss) {
  const Node& root = nodes_.at(loss);
  if (!root.value.is_scalar()) {
    throw DimensionError("backward needs a scalar loss, got " +
                         ShapeToString(root.value.shape()));
  }
  for (Node& n : nodes_) n.grad = Tensor();
  backward_order_.clear();
  GradAccumulator(loss)[0] = 1.0;
  for (NodeId id = loss + 1; id-- > 0;) {
    backward_order_.push_back(id);
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty() || !n.backward) continue;
    n.backward(*this, id);
  }
}

std::map<std::string, Tensor> Graph::ParameterGradients() const {
  std::map<std::string, Tensor> grads;
  for (const auto& [name, id] : parameters_) grads.emplace(name, grad(id));
  return grads;
}

}  // namespace mcrd::ad
