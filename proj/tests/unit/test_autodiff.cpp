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

#include <cmath>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <doctest.h>

#include "mcrd/errors.hpp"
#include "mcrd/gradient_check.hpp"
#include "mcrd/graph.hpp"
#include "mcrd/ops.hpp"
#include "mcrd/tensor.hpp"

namespace {

using namespace mcrd;
using namespace mcrd::ad;

Tensor Vec(std::vector<double> v) { return Tensor::Vector(std::move(v)); }

Tensor RandomTensor(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  Tensor t = Tensor::Zeros(std::move(shape));
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& x : t.values()) x = u(rng);
  return t;
}

// Magnitudes in [scale/2, 3 scale/2] with random signs. Keeps gradient
// components clear of zero, where a central difference at eps = 1e-5 cannot
// resolve 1e-6 relative error (its absolute floor is about 1e-11).
Tensor AwayFromZero(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  Tensor t = Tensor::Zeros(std::move(shape));
  std::uniform_real_distribution<double> u(0.5 * scale, 1.5 * scale);
  for (double& x : t.values()) x = rng() % 2 ? u(rng) : -u(rng);
  return t;
}

// Reduces any vector or matrix node to a scalar with fixed random weights so
// every output component reaches the loss.
NodeId Project(Graph& g, NodeId y, std::mt19937_64& rng) {
  const Tensor& v = g.value(y);
  if (v.shape().size() == 2) {
    y = WeightedRowSum(g, y, g.Constant(AwayFromZero({v.rows()}, rng)));
  }
  return Dot(g, y, g.Constant(AwayFromZero({g.value(y).size()}, rng)));
}

// Random instances with dims <= 8, checked at 1e-6.
void CheckOp(const std::string& label, const NamedTensors& params,
             const std::function<NodeId(Graph&, const NamedTensors&,
                                        std::mt19937_64&)>& build) {
  const GradCheckResult r = GradientCheck(
      [&](Graph& g, const NamedTensors& p) {
        std::mt19937_64 rng(99);  // same projection on every evaluation
        return build(g, p, rng);
      },
      params, 1e-5);
  INFO(label, ": ", r.worst_parameter, "[", r.worst_index, "] analytic ",
       r.analytic, " numeric ", r.numeric);
  CHECK(r.max_relative_error < 1e-6);
}

}  // namespace

TEST_SUITE("autodiff") {

TEST_CASE("tensor rejects bad shapes") {
  CHECK_THROWS_AS(Tensor({2, 0}), DimensionError);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), DimensionError);
  Tensor m = Tensor::Matrix(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.at(1, 2) == 6.0);
  CHECK(m.row(1)[0] == 4.0);
}

TEST_CASE("affine examples") {
  Graph g;
  auto eye = g.Constant(Tensor::Matrix(2, 2, {1, 0, 0, 1}));
  auto y = Affine(g, eye, g.Constant(Vec({3, -1})), g.Constant(Vec({0, 0})));
  CHECK(g.value(y).values()[0] == 3.0);
  CHECK(g.value(y).values()[1] == -1.0);

  auto w = g.Constant(Tensor::Matrix(2, 2, {1, 2, 3, 4}));
  auto y2 = Affine(g, w, g.Constant(Vec({1, 1})), g.Constant(Vec({0.5, -0.5})));
  // 1 + 2 + 0.5 and 3 + 4 - 0.5
  CHECK(g.value(y2)[0] == 3.5);
  CHECK(g.value(y2)[1] == 6.5);

  auto zero = g.Constant(Tensor::Zeros({1, 4}));
  auto y3 = Affine(g, zero, g.Constant(Vec({9, -2, 4, 1})), g.Constant(Vec({7})));
  CHECK(g.value(y3)[0] == 7.0);
}

TEST_CASE("affine shape errors name both shapes") {
  Graph g;
  auto w = g.Constant(Tensor::Zeros({2, 3}));
  auto x = g.Constant(Tensor::Zeros({4}));
  auto b = g.Constant(Tensor::Zeros({2}));
  try {
    Affine(g, w, x, b);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
    CHECK(msg.find("[4]") != std::string::npos);
  }
}

TEST_CASE("lstm step examples") {
  Graph g;
  const std::size_t d = 1, l = 1;
  LstmWeights zero{g.Constant(Tensor::Zeros({4 * l, d + l})),
                   g.Constant(Tensor::Zeros({4 * l}))};
  auto x = g.Constant(Vec({0.7}));
  auto h0 = g.Constant(Vec({0.0}));

  auto s = LstmStep(g, zero, x, h0, g.Constant(Vec({0.0})));
  CHECK(g.value(s.h)[0] == 0.0);
  CHECK(g.value(s.c)[0] == 0.0);

  // Gates at sigmoid(0) = 0.5, candidate tanh(0) = 0: c = 0.5 * 2.
  auto s2 = LstmStep(g, zero, x, h0, g.Constant(Vec({2.0})));
  CHECK(g.value(s2.c)[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.value(s2.h)[0] == doctest::Approx(0.5 * std::tanh(1.0)).epsilon(1e-15));
  CHECK(g.value(s2.h)[0] == doctest::Approx(0.3808).epsilon(1e-4));

  // Saturated forget gate keeps the cell: gate rows are i, f, o, g.
  LstmWeights keep{g.Constant(Tensor::Zeros({4, 2})),
                   g.Constant(Vec({-50, 50, 0, 0}))};
  auto s3 = LstmStep(g, keep, x, h0, g.Constant(Vec({1.25})));
  CHECK(g.value(s3.c)[0] == doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("masked max pool examples") {
  Graph g;
  auto rows = g.Constant(Tensor::Matrix(3, 2, {1, 5, 3, 2, 9, 0}));
  const std::vector<std::uint8_t> mask{1, 1, 0};
  auto r = MaskedMaxPool(g, rows, mask);
  CHECK(g.value(r.pooled)[0] == 3.0);
  CHECK(g.value(r.pooled)[1] == 5.0);
  CHECK(r.argmax == std::vector<std::size_t>{1, 0});

  auto single = MaskedMaxPool(g, g.Constant(Tensor::Matrix(1, 2, {4, -1})),
                              std::vector<std::uint8_t>{1});
  CHECK(g.value(single.pooled)[1] == -1.0);

  auto tied = MaskedMaxPool(g, g.Constant(Tensor::Matrix(3, 2, {2, 2, 2, 2, 2, 2})),
                            std::vector<std::uint8_t>{1, 1, 1});
  CHECK(tied.argmax == std::vector<std::size_t>{0, 0});

  CHECK_THROWS_AS(MaskedMaxPool(g, rows, std::vector<std::uint8_t>{0, 0, 0}),
                  EmptyInputError);
}

TEST_CASE("max pool gradient goes to the selected row only") {
  Graph g;
  auto rows = g.Parameter("rows", Tensor::Matrix(2, 2, {1, 1, 1, 0}));
  auto r = MaskedMaxPool(g, rows, std::vector<std::uint8_t>{1, 1});
  g.Backward(Dot(g, r.pooled, g.Constant(Vec({1, 1}))));
  const Tensor grad = g.grad(rows);
  CHECK(grad.at(0, 0) == 1.0);  // tie -> lowest index
  CHECK(grad.at(1, 0) == 0.0);
  CHECK(grad.at(0, 1) == 1.0);
  CHECK(grad.at(1, 1) == 0.0);
}

TEST_CASE("softmax cross entropy examples") {
  Graph g;
  CHECK(g.value(SoftmaxCrossEntropy(g, g.Constant(Vec({0, 0})), 0))[0] ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
  // -log(e^10 / (e^10 + 2)) = log(1 + 2 e^-10)
  const double expected = std::log1p(2.0 * std::exp(-10.0));
  const double got = g.value(SoftmaxCrossEntropy(g, g.Constant(Vec({10, 0, 0})), 0))[0];
  CHECK(got == doctest::Approx(expected).epsilon(1e-12));
  CHECK(got == doctest::Approx(9.08e-5).epsilon(1e-3));
  CHECK(g.value(SoftmaxCrossEntropy(g, g.Constant(Vec({0, 0, 0, 0, 0})), 3))[0] ==
        doctest::Approx(std::log(5.0)).epsilon(1e-15));
  CHECK_THROWS_AS(SoftmaxCrossEntropy(g, g.Constant(Vec({0, 0})), 2), RangeError);
  // Large logits stay finite.
  const double big = g.value(SoftmaxCrossEntropy(g, g.Constant(Vec({1000, 0})), 1))[0];
  CHECK(big == doctest::Approx(1000.0));
}

TEST_CASE("sigmoid cross entropy at zero logits") {
  Graph g;
  const double loss = g.value(SigmoidCrossEntropy(g, g.Constant(Vec({0, 0})), 0))[0];
  CHECK(loss == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("backward examples") {
  Graph g;
  auto x = g.Parameter("x", Vec({1, 2}));
  auto unused = g.Parameter("unused", Vec({5}));
  g.Backward(Dot(g, x, x));
  const auto grads = g.ParameterGradients();
  CHECK(grads.at("x")[0] == 2.0);
  CHECK(grads.at("x")[1] == 4.0);
  CHECK(grads.at("unused")[0] == 0.0);
  (void)unused;
}

TEST_CASE("backward rejects a non-scalar loss") {
  Graph g;
  auto x = g.Parameter("x", Vec({1, 2}));
  CHECK_THROWS_AS(g.Backward(x), DimensionError);
}

TEST_CASE("backward visits nodes in exact reverse creation order") {
  Graph g;
  auto a = g.Parameter("a", Vec({1, 2}));
  auto b = g.Parameter("b", Vec({3, 4}));
  auto c = Concat(g, a, b);
  auto d = Dot(g, c, c);
  g.Backward(d);
  const auto& order = g.last_backward_order();
  REQUIRE(!order.empty());
  for (std::size_t i = 1; i < order.size(); ++i) CHECK(order[i - 1] > order[i]);
  CHECK(order.front() == d);
}

TEST_CASE("duplicate parameter names are rejected") {
  Graph g;
  g.Parameter("w", Vec({1}));
  CHECK_THROWS_AS(g.Parameter("w", Vec({2})), Error);
}

TEST_CASE("affine into softmax cross entropy matches finite differences") {
  std::mt19937_64 rng(1);
  NamedTensors p{{"W", RandomTensor({3, 4}, rng)},
                 {"x", RandomTensor({4}, rng)},
                 {"b", RandomTensor({3}, rng)}};
  const auto r = GradientCheck(
      [](Graph& g, const NamedTensors& q) {
        auto y = Affine(g, g.Parameter("W", q.at("W")), g.Parameter("x", q.at("x")),
                        g.Parameter("b", q.at("b")));
        return SoftmaxCrossEntropy(g, y, 1);
      },
      p, 1e-5);
  CHECK(r.max_relative_error < 1e-6);
  CHECK(r.components_checked == 19);
}

TEST_CASE("gradient check examples") {
  const auto square = [](Graph& g, const NamedTensors& q) {
    auto x = g.Parameter("x", q.at("x"));
    return Dot(g, x, x);
  };
  const auto r = GradientCheck(square, {{"x", Vec({3})}}, 1e-4);
  CHECK(r.max_relative_error < 1e-8);

  // x^3 at 1 with a coarse step: the central difference is 3 + eps^2.
  const auto cube = [](Graph& g, const NamedTensors& q) {
    auto x = g.Parameter("x", q.at("x"));
    auto sq = Dot(g, x, x);
    return Dot(g, sq, x);
  };
  const auto coarse = GradientCheck(cube, {{"x", Vec({1})}}, 1e-1);
  CHECK(coarse.max_relative_error == doctest::Approx(0.01 / 3.01).epsilon(1e-6));
  CHECK_THROWS_AS(GradientCheck(cube, {{"x", Vec({1})}}, 0.0), RangeError);
}

TEST_CASE("every op passes a random gradient check") {
  std::mt19937_64 rng(2024);
  // MCRD_OP_TRIALS widens the sweep for manual stress runs.
  const char* env = std::getenv("MCRD_OP_TRIALS");
  const int trials = env != nullptr ? std::atoi(env) : 20;
  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t m = 1 + rng() % 6, n = 1 + rng() % 6, t = 1 + rng() % 5;

    CheckOp("affine",
            {{"W", AwayFromZero({m, n}, rng)}, {"x", AwayFromZero({n}, rng)},
             {"b", AwayFromZero({m}, rng)}},
            [](Graph& g, const NamedTensors& p, std::mt19937_64& r) {
              return Project(g, Affine(g, g.Parameter("W", p.at("W")),
                                       g.Parameter("x", p.at("x")),
                                       g.Parameter("b", p.at("b"))), r);
            });
    CheckOp("affine_rows",
            {{"W", AwayFromZero({m, n}, rng)}, {"X", AwayFromZero({t, n}, rng)},
             {"b", AwayFromZero({m}, rng)}},
            [](Graph& g, const NamedTensors& p, std::mt19937_64& r) {
              return Project(g, AffineRows(g, g.Parameter("W", p.at("W")),
                                           g.Parameter("X", p.at("X")),
                                           g.Parameter("b", p.at("b"))), r);
            });
    CheckOp("matvec",
            {{"A", AwayFromZero({m, n}, rng)}, {"x", AwayFromZero({n}, rng)}},
            [](Graph& g, const NamedTensors& p, std::mt19937_64& r) {
              return Project(g, MatVec(g, g.Parameter("A", p.at("A")),
                                       g.Parameter("x", p.at("x"))), r);
            });
    const auto fixed = std::make_shared<const Tensor>(AwayFromZero({m, n}, rng));
    CheckOp("fixed_matvec", {{"x", AwayFromZero({n}, rng)}},
            [fixed](Graph& g, const NamedTensors& p, std::mt19937_64& r) {
              return Project(g, FixedMatVec(g, fixed, g.Parameter("x", p.at("x"))), r);
            });
    const std::size_t d = 1 + rng() % 4, l = 1 + rng() % 4;
    CheckOp("lstm_step",
            // Weights sized so gate pre-activations stay out of saturation.
            {{"W", AwayFromZero({4 * l, d + l}, rng, 1.0 / static_cast<double>(d + l))},
             {"b", AwayFromZero({4 * l}, rng, 0.25)},
             {"x", AwayFromZero({d}, rng)}, {"h", AwayFromZero({l}, rng)},
             {"c", AwayFromZero({l}, rng)}},
            [](Graph& g, const NamedTensors& p, std::mt19937_64& r) {
              LstmWeights w{g.Parameter("W", p.at("W")), g.Parameter("b", p.at("b"))};
              auto s = LstmStep(g, w, g.Parameter("x", p.at("x")),
                                g.Parameter("h", p.at("h")), g.Parameter("c", p.at("c")));
              return Project(g, Concat(g, s.h, s.c), r);
            });
    CheckOp("slice_concat",
            {{"a", AwayFromZero({n}, rng)}, {"b", AwayFromZero({m}, rng)}},
            [n](Graph& g, const NamedTensors& p, std::mt19937_64& r) {
              auto c = Concat(g, g.Parameter("a", p.at("a")), g.Parameter("b", p.at("b")));
              return Project(g, Slice(g, c, n / 2, n / 2 + 1), r);
            });
    CheckOp("dot_aliased", {{"a", AwayFromZero({n}, rng)}},
            [](Graph& g, const NamedTensors& p, std::mt19937_64&) {
              auto a = g.Parameter("a", p.at("a"));
              return Dot(g, a, a);
            });
    CheckOp("stack_rows_weighted_sum",
            {{"a", AwayFromZero({n}, rng)}, {"b", AwayFromZero({n}, rng)},
             {"w", AwayFromZero({2}, rng)}},
            [](Graph& g, const NamedTensors& p, std::mt19937_64& r) {
              const NodeId rows[] = {g.Parameter("a", p.at("a")),
                                     g.Parameter("b", p.at("b"))};
              auto m = StackRows(g, rows);
              return Project(g, WeightedRowSum(g, m, g.Parameter("w", p.at("w"))), r);
            });
    std::vector<std::uint8_t> mask(m, 1);
    if (m > 1) mask[rng() % m] = 0;
    CheckOp("softmax", {{"z", AwayFromZero({m}, rng, 2.0)}},
            [mask](Graph& g, const NamedTensors& p, std::mt19937_64& r) {
              return Project(g, Softmax(g, g.Parameter("z", p.at("z")), mask), r);
            });
    std::vector<std::uint8_t> rows_mask(t, 1);
    if (t > 1) rows_mask[rng() % t] = 0;
    CheckOp("masked_max_pool", {{"X", AwayFromZero({t, n}, rng)}},
            [rows_mask](Graph& g, const NamedTensors& p, std::mt19937_64& r) {
              return Project(g, MaskedMaxPool(g, g.Parameter("X", p.at("X")), rows_mask).pooled, r);
            });
    SparseBuilder sb(n);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (rng() % 2) sb.Add(j, 0.5 + static_cast<double>(rng() % 3));
      }
      sb.EndRow();
    }
    const auto sparse = std::make_shared<const SparseMatrix>(std::move(sb).Build());
    CheckOp("sparse_matvec", {{"x", AwayFromZero({n}, rng)}},
            [sparse](Graph& g, const NamedTensors& p, std::mt19937_64& r) {
              return Project(g, SparseMatVec(g, sparse, g.Parameter("x", p.at("x"))), r);
            });
    CheckOp("linear_combination",
            {{"a", AwayFromZero({n}, rng)}, {"b", AwayFromZero({n}, rng)}},
            [](Graph& g, const NamedTensors& p, std::mt19937_64& r) {
              const NodeId in[] = {g.Parameter("a", p.at("a")), g.Parameter("b", p.at("b"))};
              const double c[] = {0.75, -1.5};
              return Project(g, LinearCombination(g, in, c), r);
            });
    Tensor factors = AwayFromZero({n}, rng);
    CheckOp("multiply_constant", {{"a", AwayFromZero({n}, rng)}},
            [factors](Graph& g, const NamedTensors& p, std::mt19937_64& r) {
              return Project(g, MultiplyConstant(g, g.Parameter("a", p.at("a")), factors), r);
            });
    const std::size_t target = rng() % m;
    CheckOp("softmax_cross_entropy", {{"z", AwayFromZero({m}, rng, 3.0)}},
            [target](Graph& g, const NamedTensors& p, std::mt19937_64&) {
              return SoftmaxCrossEntropy(g, g.Parameter("z", p.at("z")), target);
            });
    CheckOp("sigmoid_cross_entropy", {{"z", AwayFromZero({m}, rng, 3.0)}},
            [target](Graph& g, const NamedTensors& p, std::mt19937_64&) {
              return SigmoidCrossEntropy(g, g.Parameter("z", p.at("z")), target);
            });
  }
}

TEST_CASE("max pool dominates every valid row") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t t = 1 + rng() % 8, k = 1 + rng() % 8;
    Tensor rows = RandomTensor({t, k}, rng);
    std::vector<std::uint8_t> mask(t);
    for (auto& b : mask) b = rng() % 2;
    mask[rng() % t] = 1;
    Graph g;
    auto r = MaskedMaxPool(g, g.Constant(rows), mask);
    for (std::size_t j = 0; j < k; ++j) {
      CHECK(mask[r.argmax[j]] == 1);
      CHECK(g.value(r.pooled)[j] == rows.at(r.argmax[j], j));
      for (std::size_t i = 0; i < t; ++i) {
        if (mask[i]) CHECK(g.value(r.pooled)[j] >= rows.at(i, j));
      }
    }
  }
}

TEST_CASE("softmax cross entropy is non-negative") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    Graph g;
    const std::size_t n = 1 + rng() % 8;
    auto loss = SoftmaxCrossEntropy(g, g.Constant(RandomTensor({n}, rng, 20.0)), rng() % n);
    CHECK(g.value(loss)[0] >= 0.0);
  }
}

TEST_CASE("identical inputs give bit-identical values and gradients") {
  auto run = [] {
    std::mt19937_64 rng(3);
    Graph g;
    LstmWeights w{g.Parameter("W", RandomTensor({8, 4}, rng)),
                  g.Parameter("b", RandomTensor({8}, rng))};
    auto s = LstmStep(g, w, g.Constant(RandomTensor({2}, rng)),
                      g.Constant(RandomTensor({2}, rng)), g.Constant(RandomTensor({2}, rng)));
    auto loss = SoftmaxCrossEntropy(g, Concat(g, s.h, s.c), 1);
    g.Backward(loss);
    return std::make_pair(g.value(loss), g.ParameterGradients());
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("sparse builder produces CSR") {
  SparseBuilder b(3);
  b.Add(2, 1.0);
  b.Add(0, 2.0);
  b.EndRow();
  b.EndRow();
  const SparseMatrix s = std::move(b).Build();
  CHECK(s.rows == 2);
  CHECK(s.cols == 3);
  CHECK(s.row_offsets == std::vector<std::size_t>{0, 2, 2});
  Graph g;
  auto y = SparseMatVec(g, std::make_shared<const SparseMatrix>(s), g.Constant(Vec({1, 10, 100})));
  CHECK(g.value(y)[0] == 102.0);
  CHECK(g.value(y)[1] == 0.0);
}

}  // TEST_SUITE
