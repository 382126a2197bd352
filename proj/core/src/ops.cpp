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

#include "mcrd/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mcrd/errors.hpp"

namespace mcrd::ad {
namespace {

[[noreturn]] void ShapeMismatch(const char* op, const Tensor& a,
                                const Tensor& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " +
                       ShapeToString(a.shape()) + " and " +
                       ShapeToString(b.shape()));
}

bool IsVector(const Tensor& t) { return t.rank() == 1; }
bool IsMatrix(const Tensor& t) { return t.rank() == 2; }

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// out[i] += sum_j A[i][j] x[j]
void GemvAccumulate(const Tensor& a, std::span<const double> x,
                    std::span<double> out) {
  const std::size_t n = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* row = a.values().data() + i * n;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
    out[i] += acc;
  }
}

// out[j] += sum_i A[i][j] y[i]
void GemvTransposeAccumulate(const Tensor& a, std::span<const double> y,
                             std::span<double> out) {
  const std::size_t n = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double yi = y[i];
    if (yi == 0.0) continue;
    const double* row = a.values().data() + i * n;
    for (std::size_t j = 0; j < n; ++j) out[j] += row[j] * yi;
  }
}

// G[i][j] += y[i] x[j]
void OuterAccumulate(std::span<const double> y, std::span<const double> x,
                     Tensor& grad) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double yi = y[i];
    if (yi == 0.0) continue;
    double* row = grad.values().data() + i * n;
    for (std::size_t j = 0; j < n; ++j) row[j] += yi * x[j];
  }
}

void AddInto(std::span<const double> src, std::span<double> dst) {
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i];
}

}  // namespace

NodeId Affine(Graph& g, NodeId weight, NodeId input, NodeId bias) {
  const Tensor& w = g.value(weight);
  const Tensor& x = g.value(input);
  const Tensor& b = g.value(bias);
  if (!IsMatrix(w) || !IsVector(x) || w.cols() != x.size()) {
    ShapeMismatch("affine", w, x);
  }
  if (!IsVector(b) || b.size() != w.rows()) ShapeMismatch("affine", w, b);
  Tensor y = b;
  GemvAccumulate(w, x.values(), y.values());
  return g.AddNode(
      OpKind::kAffine, {weight, input, bias}, std::move(y),
      [weight, input, bias](Graph& g, NodeId self) {
        const Tensor& gy = g.node(self).grad;
        if (g.requires_grad(weight)) {
          OuterAccumulate(gy.values(), g.value(input).values(),
                          g.GradAccumulator(weight));
        }
        if (g.requires_grad(input)) {
          GemvTransposeAccumulate(g.value(weight), gy.values(),
                                  g.GradAccumulator(input).values());
        }
        if (g.requires_grad(bias)) {
          AddInto(gy.values(), g.GradAccumulator(bias).values());
        }
      });
}

NodeId AffineRows(Graph& g, NodeId weight, NodeId rows, NodeId bias) {
  const Tensor& w = g.value(weight);
  const Tensor& x = g.value(rows);
  const Tensor& b = g.value(bias);
  if (!IsMatrix(w) || !IsMatrix(x) || w.cols() != x.cols()) {
    ShapeMismatch("affine_rows", w, x);
  }
  if (!IsVector(b) || b.size() != w.rows()) ShapeMismatch("affine_rows", w, b);
  const std::size_t t_len = x.rows();
  const std::size_t m = w.rows();
  Tensor y({t_len, m});
  for (std::size_t t = 0; t < t_len; ++t) {
    auto out = y.row(t);
    std::copy(b.values().begin(), b.values().end(), out.begin());
    GemvAccumulate(w, x.row(t), out);
  }
  return g.AddNode(
      OpKind::kAffineRows, {weight, rows, bias}, std::move(y),
      [weight, rows, bias](Graph& g, NodeId self) {
        const Tensor& gy = g.node(self).grad;
        const Tensor& x = g.value(rows);
        for (std::size_t t = 0; t < gy.rows(); ++t) {
          if (g.requires_grad(weight)) {
            OuterAccumulate(gy.row(t), x.row(t), g.GradAccumulator(weight));
          }
          if (g.requires_grad(rows)) {
            GemvTransposeAccumulate(g.value(weight), gy.row(t),
                                    g.GradAccumulator(rows).row(t));
          }
          if (g.requires_grad(bias)) {
            AddInto(gy.row(t), g.GradAccumulator(bias).values());
          }
        }
      });
}

NodeId MatVec(Graph& g, NodeId matrix, NodeId input) {
  const Tensor& a = g.value(matrix);
  const Tensor& x = g.value(input);
  if (!IsMatrix(a) || !IsVector(x) || a.cols() != x.size()) {
    ShapeMismatch("matvec", a, x);
  }
  Tensor y({a.rows()});
  GemvAccumulate(a, x.values(), y.values());
  return g.AddNode(OpKind::kMatVec, {matrix, input}, std::move(y),
                   [matrix, input](Graph& g, NodeId self) {
                     const Tensor& gy = g.node(self).grad;
                     if (g.requires_grad(matrix)) {
                       OuterAccumulate(gy.values(), g.value(input).values(),
                                       g.GradAccumulator(matrix));
                     }
                     if (g.requires_grad(input)) {
                       GemvTransposeAccumulate(
                           g.value(matrix), gy.values(),
                           g.GradAccumulator(input).values());
                     }
                   });
}

NodeId FixedMatVec(Graph& g, std::shared_ptr<const Tensor> matrix,
                   NodeId input) {
  const Tensor& x = g.value(input);
  if (!IsMatrix(*matrix) || !IsVector(x) || matrix->cols() != x.size()) {
    ShapeMismatch("fixed_matvec", *matrix, x);
  }
  Tensor y({matrix->rows()});
  GemvAccumulate(*matrix, x.values(), y.values());
  return g.AddNode(OpKind::kFixedMatVec, {input}, std::move(y),
                   [matrix = std::move(matrix), input](Graph& g, NodeId self) {
                     GemvTransposeAccumulate(*matrix, g.node(self).grad.values(),
                                             g.GradAccumulator(input).values());
                   });
}

LstmState LstmStep(Graph& g, const LstmWeights& weights, NodeId input,
                   NodeId h_prev, NodeId c_prev) {
  const Tensor& w = g.value(weights.weight);
  const Tensor& b = g.value(weights.bias);
  const Tensor& x = g.value(input);
  const Tensor& h = g.value(h_prev);
  const Tensor& c = g.value(c_prev);
  const std::size_t l = h.size();
  const std::size_t d = x.size();
  if (!IsVector(x) || !IsVector(h) || !IsVector(c) || c.size() != l) {
    ShapeMismatch("lstm_step", h, c);
  }
  if (!IsMatrix(w) || w.rows() != 4 * l || w.cols() != d + l) {
    throw DimensionError("lstm_step: weight " + ShapeToString(w.shape()) +
                         " does not map input " + ShapeToString(x.shape()) +
                         " and state " + ShapeToString(h.shape()));
  }
  if (!IsVector(b) || b.size() != 4 * l) ShapeMismatch("lstm_step", w, b);

  std::vector<double> joined(d + l);
  std::copy(x.values().begin(), x.values().end(), joined.begin());
  std::copy(h.values().begin(), h.values().end(), joined.begin() + d);
  std::vector<double> gates(b.values().begin(), b.values().end());
  GemvAccumulate(w, joined, gates);
  for (std::size_t k = 0; k < 3 * l; ++k) gates[k] = Sigmoid(gates[k]);
  for (std::size_t k = 3 * l; k < 4 * l; ++k) gates[k] = std::tanh(gates[k]);

  // Output packs [h_t; c_t]; callers see the halves through Slice.
  Tensor state({2 * l});
  std::vector<double> tanh_c(l);
  for (std::size_t k = 0; k < l; ++k) {
    const double ig = gates[k], fg = gates[l + k], og = gates[2 * l + k],
                 cand = gates[3 * l + k];
    const double c_new = fg * c[k] + ig * cand;
    tanh_c[k] = std::tanh(c_new);
    state[k] = og * tanh_c[k];
    state[l + k] = c_new;
  }

  const NodeId packed = g.AddNode(
      OpKind::kLstmStep, {weights.weight, weights.bias, input, h_prev, c_prev},
      std::move(state),
      [weights, input, h_prev, c_prev, l, d, joined = std::move(joined),
       gates = std::move(gates),
       tanh_c = std::move(tanh_c)](Graph& g, NodeId self) {
        const Tensor& gs = g.node(self).grad;
        const Tensor& c = g.value(c_prev);
        std::vector<double> dz(4 * l);
        std::vector<double> dc_prev(l);
        for (std::size_t k = 0; k < l; ++k) {
          const double ig = gates[k], fg = gates[l + k], og = gates[2 * l + k],
                       cand = gates[3 * l + k];
          const double dh = gs[k];
          const double dc =
              gs[l + k] + dh * og * (1.0 - tanh_c[k] * tanh_c[k]);
          dz[k] = dc * cand * ig * (1.0 - ig);
          dz[l + k] = dc * c[k] * fg * (1.0 - fg);
          dz[2 * l + k] = dh * tanh_c[k] * og * (1.0 - og);
          dz[3 * l + k] = dc * ig * (1.0 - cand * cand);
          dc_prev[k] = dc * fg;
        }
        if (g.requires_grad(weights.weight)) {
          OuterAccumulate(dz, joined, g.GradAccumulator(weights.weight));
        }
        if (g.requires_grad(weights.bias)) {
          AddInto(dz, g.GradAccumulator(weights.bias).values());
        }
        if (g.requires_grad(input) || g.requires_grad(h_prev)) {
          std::vector<double> djoined(d + l);
          GemvTransposeAccumulate(g.value(weights.weight), dz, djoined);
          if (g.requires_grad(input)) {
            AddInto(std::span<const double>(djoined).first(d),
                    g.GradAccumulator(input).values());
          }
          if (g.requires_grad(h_prev)) {
            AddInto(std::span<const double>(djoined).subspan(d),
                    g.GradAccumulator(h_prev).values());
          }
        }
        if (g.requires_grad(c_prev)) {
          AddInto(dc_prev, g.GradAccumulator(c_prev).values());
        }
      });
  return {Slice(g, packed, 0, l), Slice(g, packed, l, l)};
}

NodeId Slice(Graph& g, NodeId input, std::size_t offset, std::size_t length) {
  const Tensor& x = g.value(input);
  if (!IsVector(x) || length == 0 || offset + length > x.size()) {
    throw DimensionError("slice [" + std::to_string(offset) + ", " +
                         std::to_string(offset + length) + ") out of " +
                         ShapeToString(x.shape()));
  }
  auto src = x.values().subspan(offset, length);
  Tensor y = Tensor::Vector({src.begin(), src.end()});
  return g.AddNode(OpKind::kSlice, {input}, std::move(y),
                   [input, offset, length](Graph& g, NodeId self) {
                     AddInto(g.node(self).grad.values(),
                             g.GradAccumulator(input).values().subspan(
                                 offset, length));
                   });
}

NodeId Concat(Graph& g, NodeId first, NodeId second) {
  const Tensor& a = g.value(first);
  const Tensor& b = g.value(second);
  if (!IsVector(a) || !IsVector(b)) ShapeMismatch("concat", a, b);
  std::vector<double> joined(a.values().begin(), a.values().end());
  joined.insert(joined.end(), b.values().begin(), b.values().end());
  const std::size_t split = a.size();
  return g.AddNode(
      OpKind::kConcat, {first, second}, Tensor::Vector(std::move(joined)),
      [first, second, split](Graph& g, NodeId self) {
        auto gy = g.node(self).grad.values();
        if (g.requires_grad(first)) {
          AddInto(gy.first(split), g.GradAccumulator(first).values());
        }
        if (g.requires_grad(second)) {
          AddInto(gy.subspan(split), g.GradAccumulator(second).values());
        }
      });
}

NodeId Dot(Graph& g, NodeId a, NodeId b) {
  const Tensor& x = g.value(a);
  const Tensor& y = g.value(b);
  if (!IsVector(x) || !IsVector(y) || x.size() != y.size()) {
    ShapeMismatch("dot", x, y);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return g.AddNode(OpKind::kDot, {a, b}, Tensor::Scalar(acc),
                   [a, b](Graph& g, NodeId self) {
                     const double gy = g.node(self).grad[0];
                     // Read both values before accumulating: a and b may alias.
                     const Tensor xa = g.value(a);
                     const Tensor xb = g.value(b);
                     if (g.requires_grad(a)) {
                       auto ga = g.GradAccumulator(a).values();
                       for (std::size_t i = 0; i < ga.size(); ++i) {
                         ga[i] += gy * xb[i];
                       }
                     }
                     if (g.requires_grad(b)) {
                       auto gb = g.GradAccumulator(b).values();
                       for (std::size_t i = 0; i < gb.size(); ++i) {
                         gb[i] += gy * xa[i];
                       }
                     }
                   });
}

NodeId StackRows(Graph& g, std::span<const NodeId> rows) {
  if (rows.empty()) throw EmptyInputError("stack_rows: no rows");
  const std::size_t k = g.value(rows[0]).size();
  Tensor m({rows.size(), k});
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const Tensor& r = g.value(rows[t]);
    if (!IsVector(r) || r.size() != k) {
      ShapeMismatch("stack_rows", g.value(rows[0]), r);
    }
    std::copy(r.values().begin(), r.values().end(), m.row(t).begin());
  }
  std::vector<NodeId> parents(rows.begin(), rows.end());
  return g.AddNode(OpKind::kStackRows, parents, std::move(m),
                   [parents](Graph& g, NodeId self) {
                     const Tensor& gm = g.node(self).grad;
                     for (std::size_t t = 0; t < parents.size(); ++t) {
                       if (g.requires_grad(parents[t])) {
                         AddInto(gm.row(t),
                                 g.GradAccumulator(parents[t]).values());
                       }
                     }
                   });
}

NodeId WeightedRowSum(Graph& g, NodeId matrix, NodeId weights) {
  const Tensor& m = g.value(matrix);
  const Tensor& w = g.value(weights);
  if (!IsMatrix(m) || !IsVector(w) || w.size() != m.rows()) {
    ShapeMismatch("weighted_row_sum", m, w);
  }
  Tensor v({m.cols()});
  GemvTransposeAccumulate(m, w.values(), v.values());
  return g.AddNode(OpKind::kWeightedRowSum, {matrix, weights}, std::move(v),
                   [matrix, weights](Graph& g, NodeId self) {
                     const Tensor& gv = g.node(self).grad;
                     if (g.requires_grad(matrix)) {
                       OuterAccumulate(g.value(weights).values(), gv.values(),
                                       g.GradAccumulator(matrix));
                     }
                     if (g.requires_grad(weights)) {
                       GemvAccumulate(g.value(matrix), gv.values(),
                                      g.GradAccumulator(weights).values());
                     }
                   });
}

NodeId Softmax(Graph& g, NodeId logits, std::span<const std::uint8_t> mask) {
  const Tensor& x = g.value(logits);
  if (!IsVector(x)) ShapeMismatch("softmax", x, x);
  if (!mask.empty() && mask.size() != x.size()) {
    throw DimensionError("softmax: mask of length " +
                         std::to_string(mask.size()) + " for logits " +
                         ShapeToString(x.shape()));
  }
  auto valid = [&](std::size_t i) { return mask.empty() || mask[i] != 0; };
  double mx = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (valid(i) && (!any || x[i] > mx)) {
      mx = x[i];
      any = true;
    }
  }
  if (!any) throw EmptyInputError("softmax: every position is masked");
  Tensor p = Tensor::ZerosLike(x);
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (valid(i)) total += (p[i] = std::exp(x[i] - mx));
  }
  for (double& v : p.values()) v /= total;
  return g.AddNode(OpKind::kSoftmax, {logits}, std::move(p),
                   [logits](Graph& g, NodeId self) {
                     const Tensor& p = g.node(self).value;
                     const Tensor& gp = g.node(self).grad;
                     double inner = 0.0;
                     for (std::size_t i = 0; i < p.size(); ++i) {
                       inner += gp[i] * p[i];
                     }
                     auto gx = g.GradAccumulator(logits).values();
                     for (std::size_t i = 0; i < p.size(); ++i) {
                       gx[i] += p[i] * (gp[i] - inner);
                     }
                   });
}

PoolResult MaskedMaxPool(Graph& g, NodeId rows,
                         std::span<const std::uint8_t> mask) {
  const Tensor& m = g.value(rows);
  if (!IsMatrix(m) || mask.size() != m.rows()) {
    throw DimensionError("masked_max_pool: mask of length " +
                         std::to_string(mask.size()) + " for rows " +
                         ShapeToString(m.shape()));
  }
  const std::size_t k = m.cols();
  std::vector<std::size_t> argmax(k, m.rows());
  Tensor pooled({k});
  for (std::size_t t = 0; t < m.rows(); ++t) {
    if (mask[t] == 0) continue;
    for (std::size_t j = 0; j < k; ++j) {
      if (argmax[j] == m.rows() || m.at(t, j) > pooled[j]) {
        pooled[j] = m.at(t, j);
        argmax[j] = t;
      }
    }
  }
  if (k > 0 && argmax[0] == m.rows()) {
    throw EmptyInputError("masked_max_pool: every position is masked");
  }
  const NodeId id = g.AddNode(
      OpKind::kMaskedMaxPool, {rows}, std::move(pooled),
      [rows, argmax](Graph& g, NodeId self) {
        const Tensor& gp = g.node(self).grad;
        Tensor& gm = g.GradAccumulator(rows);
        for (std::size_t j = 0; j < argmax.size(); ++j) {
          gm.at(argmax[j], j) += gp[j];
        }
      });
  return {id, std::move(argmax)};
}

NodeId SparseMatVec(Graph& g, std::shared_ptr<const SparseMatrix> matrix,
                    NodeId input) {
  const Tensor& x = g.value(input);
  if (!IsVector(x) || x.size() != matrix->cols) {
    throw DimensionError("sparse_matvec: matrix [" +
                         std::to_string(matrix->rows) + "x" +
                         std::to_string(matrix->cols) + "] and input " +
                         ShapeToString(x.shape()));
  }
  Tensor y({matrix->rows});
  for (std::size_t r = 0; r < matrix->rows; ++r) {
    double acc = 0.0;
    for (std::size_t p = matrix->row_offsets[r];
         p < matrix->row_offsets[r + 1]; ++p) {
      acc += matrix->values[p] * x[matrix->col_indices[p]];
    }
    y[r] = acc;
  }
  return g.AddNode(OpKind::kSparseMatVec, {input}, std::move(y),
                   [matrix = std::move(matrix), input](Graph& g, NodeId self) {
                     const Tensor& gy = g.node(self).grad;
                     auto gx = g.GradAccumulator(input).values();
                     for (std::size_t r = 0; r < matrix->rows; ++r) {
                       if (gy[r] == 0.0) continue;
                       for (std::size_t p = matrix->row_offsets[r];
                            p < matrix->row_offsets[r + 1]; ++p) {
                         gx[matrix->col_indices[p]] +=
                             matrix->values[p] * gy[r];
                       }
                     }
                   });
}

NodeId LinearCombination(Graph& g, std::span<const NodeId> inputs,
                         std::span<const double> coeffs) {
  if (inputs.empty()) throw EmptyInputError("linear_combination: no inputs");
  if (inputs.size() != coeffs.size()) {
    throw DimensionError("linear_combination: " +
                         std::to_string(inputs.size()) + " inputs, " +
                         std::to_string(coeffs.size()) + " coefficients");
  }
  const Tensor& first = g.value(inputs[0]);
  Tensor y = Tensor::ZerosLike(first);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor& x = g.value(inputs[k]);
    if (x.shape() != first.shape()) {
      ShapeMismatch("linear_combination", first, x);
    }
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += coeffs[k] * x[i];
  }
  std::vector<NodeId> parents(inputs.begin(), inputs.end());
  std::vector<double> c(coeffs.begin(), coeffs.end());
  return g.AddNode(OpKind::kLinearCombination, parents, std::move(y),
                   [parents, c = std::move(c)](Graph& g, NodeId self) {
                     const Tensor& gy = g.node(self).grad;
                     for (std::size_t k = 0; k < parents.size(); ++k) {
                       if (!g.requires_grad(parents[k])) continue;
                       auto gx = g.GradAccumulator(parents[k]).values();
                       for (std::size_t i = 0; i < gx.size(); ++i) {
                         gx[i] += c[k] * gy[i];
                       }
                     }
                   });
}

NodeId MultiplyConstant(Graph& g, NodeId input, Tensor factors) {
  const Tensor& x = g.value(input);
  if (x.shape() != factors.shape()) {
    ShapeMismatch("multiply_constant", x, factors);
  }
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= factors[i];
  return g.AddNode(OpKind::kMultiplyConstant, {input}, std::move(y),
                   [input, factors = std::move(factors)](Graph& g,
                                                         NodeId self) {
                     const Tensor& gy = g.node(self).grad;
                     auto gx = g.GradAccumulator(input).values();
                     for (std::size_t i = 0; i < gx.size(); ++i) {
                       gx[i] += factors[i] * gy[i];
                     }
                   });
}

NodeId SoftmaxCrossEntropy(Graph& g, NodeId logits, std::size_t target) {
  const Tensor& x = g.value(logits);
  if (!IsVector(x)) ShapeMismatch("softmax_cross_entropy", x, x);
  if (target >= x.size()) {
    throw RangeError("softmax_cross_entropy: target " +
                     std::to_string(target) + " outside " +
                     std::to_string(x.size()) + " classes");
  }
  const double mx = *std::max_element(x.values().begin(), x.values().end());
  std::vector<double> probs(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    total += (probs[i] = std::exp(x[i] - mx));
  }
  const double log_total = std::log(total);
  const double loss = log_total - (x[target] - mx);
  for (double& p : probs) p /= total;
  return g.AddNode(
      OpKind::kSoftmaxCrossEntropy, {logits}, Tensor::Scalar(loss),
      [logits, target, probs = std::move(probs)](Graph& g, NodeId self) {
        const double gy = g.node(self).grad[0];
        auto gx = g.GradAccumulator(logits).values();
        for (std::size_t i = 0; i < gx.size(); ++i) {
          gx[i] += gy * (probs[i] - (i == target ? 1.0 : 0.0));
        }
      });
}

NodeId SigmoidCrossEntropy(Graph& g, NodeId logits, std::size_t target) {
  const Tensor& x = g.value(logits);
  if (!IsVector(x)) ShapeMismatch("sigmoid_cross_entropy", x, x);
  if (target >= x.size()) {
    throw RangeError("sigmoid_cross_entropy: target " +
                     std::to_string(target) + " outside " +
                     std::to_string(x.size()) + " classes");
  }
  // BCE(sigmoid(s), y) = max(s, 0) - y s + log(1 + exp(-|s|))
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = x[i];
    const double y = i == target ? 1.0 : 0.0;
    loss += std::max(s, 0.0) - y * s + std::log1p(std::exp(-std::abs(s)));
  }
  return g.AddNode(OpKind::kSigmoidCrossEntropy, {logits},
                   Tensor::Scalar(loss),
                   [logits, target](Graph& g, NodeId self) {
                     const double gy = g.node(self).grad[0];
                     const Tensor& x = g.value(logits);
                     auto gx = g.GradAccumulator(logits).values();
                     for (std::size_t i = 0; i < gx.size(); ++i) {
                       const double y = i == target ? 1.0 : 0.0;
                       gx[i] += gy * (Sigmoid(x[i]) - y);
                     }
                   });
}

}  // namespace mcrd::ad
