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
#include <random>
#include <vector>

#include <doctest.h>

#include "fixtures.hpp"
#include "mcrd/encoder.hpp"
#include "mcrd/errors.hpp"
#include "mcrd/params.hpp"

namespace {

using namespace mcrd;

struct ScalarLstm {
  // Rows i, f, o, g; columns [x, h].
  double w[4][2];
  double b[4];

  void Step(double x, double& h, double& c) const {
    auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
    const double zi = w[0][0] * x + w[0][1] * h + b[0];
    const double zf = w[1][0] * x + w[1][1] * h + b[1];
    const double zo = w[2][0] * x + w[2][1] * h + b[2];
    const double zg = w[3][0] * x + w[3][1] * h + b[3];
    c = sig(zf) * c + sig(zi) * std::tanh(zg);
    h = sig(zo) * std::tanh(c);
  }
  Tensor Weight() const {
    return Tensor::Matrix(4, 2, {w[0][0], w[0][1], w[1][0], w[1][1], w[2][0],
                                 w[2][1], w[3][0], w[3][1]});
  }
  Tensor Bias() const { return Tensor::Vector({b[0], b[1], b[2], b[3]}); }
};

ModelParams LstmParams(const ScalarLstm& fwd, const ScalarLstm& bwd) {
  ModelParams p;
  p[names::kLstmForwardWeight] = fwd.Weight();
  p[names::kLstmForwardBias] = fwd.Bias();
  p[names::kLstmBackwardWeight] = bwd.Weight();
  p[names::kLstmBackwardBias] = bwd.Bias();
  return p;
}

EncoderConfig Config(std::size_t d, std::size_t l, double dropout = 0.0) {
  EncoderConfig c;
  c.input_dim = d;
  c.hidden = l;
  c.dropout = dropout;
  return c;
}

ModelParams RandomEncoderParams(const EncoderConfig& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return InitParams(c, FeatureRegistry{}, rng);
}

QueryBatch Single(std::vector<std::size_t> tokens, std::size_t pad) {
  std::vector<DefinitionEntry> e{{0, std::move(tokens)}};
  return MakeBatch(e, pad);
}

}  // namespace

TEST_SUITE("encoder") {

TEST_CASE("two-token query matches a scalar trace") {
  const ScalarLstm fwd{{{0.3, -0.2}, {0.1, 0.4}, {-0.5, 0.6}, {0.7, 0.2}},
                       {0.05, 1.0, -0.1, 0.0}};
  const ScalarLstm bwd{{{-0.4, 0.3}, {0.2, -0.1}, {0.6, 0.5}, {-0.3, 0.8}},
                       {0.0, 0.5, 0.2, -0.05}};
  const EmbeddingMatrix emb(Tensor::Matrix(2, 1, {0.5, -1.0}));
  const ModelParams params = LstmParams(fwd, bwd);

  // Oracle: plain scalar recurrence, left to right then right to left.
  double hf[2], hb[2];
  double h = 0, c = 0;
  fwd.Step(0.5, h, c);
  hf[0] = h;
  fwd.Step(-1.0, h, c);
  hf[1] = h;
  h = c = 0;
  bwd.Step(-1.0, h, c);
  hb[1] = h;
  bwd.Step(0.5, h, c);
  hb[0] = h;
  const double anchor[2] = {hf[1], hb[0]};
  double alpha[2], v[2] = {0, 0};
  for (int t = 0; t < 2; ++t) {
    alpha[t] = anchor[0] * hf[t] + anchor[1] * hb[t];
    v[0] += alpha[t] * hf[t];
    v[1] += alpha[t] * hb[t];
  }

  const auto states =
      Encode(Single({0, 1}, 3), params, Config(1, 1), emb, false, 0);
  REQUIRE(states.size() == 1);
  const EncoderState& s = states[0];
  for (int t = 0; t < 2; ++t) {
    CHECK(s.h_forward[t] == doctest::Approx(hf[t]).epsilon(1e-14));
    CHECK(s.h_backward[t] == doctest::Approx(hb[t]).epsilon(1e-14));
    CHECK(s.alpha[t] == doctest::Approx(alpha[t]).epsilon(1e-13));
  }
  CHECK(s.anchor[0] == doctest::Approx(anchor[0]).epsilon(1e-14));
  CHECK(s.anchor[1] == doctest::Approx(anchor[1]).epsilon(1e-14));
  CHECK(s.v[0] == doctest::Approx(v[0]).epsilon(1e-13));
  CHECK(s.v[1] == doctest::Approx(v[1]).epsilon(1e-13));
}

TEST_CASE("single token closed form") {
  auto lex = testing::RandomLexicon({.words = 10, .dim = 4});
  const EncoderConfig cfg = Config(4, 3);
  const auto s = Encode(Single({2}, lex->vocab.pad_index()),
                        RandomEncoderParams(cfg, 5), cfg, lex->embeddings,
                        false, 0)[0];
  double norm2 = 0;
  for (double x : s.h.values()) norm2 += x * x;
  CHECK(std::ranges::equal(s.anchor.values(), s.h.values()));
  CHECK(s.alpha[0] == doctest::Approx(norm2).epsilon(1e-15));
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(s.v[k] == doctest::Approx(norm2 * s.h[k]).epsilon(1e-15));
  }
}

TEST_CASE("zero weights give a zero sentence vector") {
  auto lex = testing::RandomLexicon({.words = 10, .dim = 4});
  const EncoderConfig cfg = Config(4, 3);
  ModelParams p = RandomEncoderParams(cfg, 5);
  for (auto& [name, t] : p) {
    for (double& x : t.values()) x = 0.0;
  }
  const auto s = Encode(Single({1, 2, 3}, lex->vocab.pad_index()), p, cfg,
                        lex->embeddings, false, 0)[0];
  for (double x : s.h.values()) CHECK(x == 0.0);
  for (double x : s.v.values()) CHECK(x == 0.0);
}

TEST_CASE("concatenation order and anchor") {
  auto lex = testing::RandomLexicon({.words = 10, .dim = 4});
  const EncoderConfig cfg = Config(4, 3);
  const auto s = Encode(Single({1, 5, 7, 2}, lex->vocab.pad_index()),
                        RandomEncoderParams(cfg, 9), cfg, lex->embeddings,
                        false, 0)[0];
  REQUIRE(s.h.rows() == 4);
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(s.h.at(t, k) == s.h_forward.at(t, k));
      CHECK(s.h.at(t, 3 + k) == s.h_backward.at(t, k));
    }
  }
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(s.anchor[k] == s.h_forward.at(3, k));
    CHECK(s.anchor[3 + k] == s.h_backward.at(0, k));
  }
}

TEST_CASE("attend examples") {
  const std::vector<std::uint8_t> all{1, 1, 1};
  SUBCASE("orthogonal anchor") {
    const Tensor h = Tensor::Matrix(3, 4, {1, 0, 0, 0, 0, 2, 0, 0, 0, 0, 3, 0});
    const auto r = Attend(h, Tensor::Vector({0, 0, 0, 5}), all,
                          AttentionMode::kLiteral);
    for (double a : r.alpha.values()) CHECK(a == 0.0);
    for (double x : r.v.values()) CHECK(x == 0.0);
  }
  SUBCASE("basis rows") {
    const Tensor h = Tensor::Matrix(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    const auto r = Attend(h, Tensor::Vector({1, 1, 1}), all,
                          AttentionMode::kLiteral);
    for (double a : r.alpha.values()) CHECK(a == 1.0);
    for (double x : r.v.values()) CHECK(x == 1.0);
  }
  SUBCASE("softmax over identical rows is uniform") {
    const Tensor h = Tensor::Matrix(4, 2, {0.3, -1, 0.3, -1, 0.3, -1, 9, 9});
    const std::vector<std::uint8_t> mask{1, 1, 1, 0};
    const auto r = Attend(h, Tensor::Vector({2, 0.5}), mask,
                          AttentionMode::kSoftmax);
    for (int i = 0; i < 3; ++i) {
      CHECK(r.alpha[i] == doctest::Approx(1.0 / 3).epsilon(1e-15));
    }
    CHECK(r.alpha[3] == 0.0);
    CHECK(r.v[0] == doctest::Approx(0.3).epsilon(1e-15));
  }
  SUBCASE("masked rows drop out in literal mode") {
    const Tensor h = Tensor::Matrix(2, 2, {1, 2, 3, 4});
    const std::vector<std::uint8_t> mask{1, 0};
    const auto r = Attend(h, Tensor::Vector({1, 1}), mask,
                          AttentionMode::kLiteral);
    CHECK(r.alpha[0] == 3.0);
    CHECK(r.alpha[1] == 0.0);
    CHECK(r.v[0] == 3.0);
    CHECK(r.v[1] == 6.0);
  }
  SUBCASE("all masked") {
    const std::vector<std::uint8_t> none{0, 0};
    CHECK_THROWS_AS(Attend(Tensor::Matrix(2, 1, {1, 2}), Tensor::Vector({1}),
                           none, AttentionMode::kLiteral),
                    EmptyInputError);
  }
}

TEST_CASE("literal attention scales as s^2 and s^3") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor h({5, 6});
    Tensor a({6});
    for (double& x : h.values()) x = u(rng);
    for (double& x : a.values()) x = u(rng);
    const std::vector<std::uint8_t> mask{1, 1, 0, 1, 1};
    const auto base = Attend(h, a, mask, AttentionMode::kLiteral);
    // Powers of two keep the scaling exact.
    for (double s : {0.5, 2.0, 4.0}) {
      Tensor hs = h, as = a;
      for (double& x : hs.values()) x *= s;
      for (double& x : as.values()) x *= s;
      const auto r = Attend(hs, as, mask, AttentionMode::kLiteral);
      for (std::size_t i = 0; i < 5; ++i) CHECK(r.alpha[i] == base.alpha[i] * s * s);
      for (std::size_t k = 0; k < 6; ++k) CHECK(r.v[k] == base.v[k] * s * s * s);
    }
  }
}

TEST_CASE("padding does not change the encoding") {
  auto lex = testing::RandomLexicon({.words = 30, .dim = 5});
  const std::size_t pad = lex->vocab.pad_index();
  const EncoderConfig cfg = Config(5, 4, 0.5);
  const ModelParams p = RandomEncoderParams(cfg, 2);
  const std::vector<std::size_t> tokens{4, 9, lex->vocab.unk_index(), 17};
  const QueryBatch tight = Single(tokens, pad);
  QueryBatch padded = tight;
  padded.max_length = 7;
  padded.tokens = tokens;
  padded.tokens.resize(7, pad);
  padded.mask = {1, 1, 1, 1, 0, 0, 0};
  for (bool training : {false, true}) {
    const auto a = Encode(tight, p, cfg, lex->embeddings, training, 31)[0];
    const auto b = Encode(padded, p, cfg, lex->embeddings, training, 31)[0];
    CHECK(std::ranges::equal(a.h.values(), b.h.values()));
    CHECK(std::ranges::equal(a.anchor.values(), b.anchor.values()));
    CHECK(std::ranges::equal(a.alpha.values(), b.alpha.values()));
    CHECK(std::ranges::equal(a.v.values(), b.v.values()));
  }
}

TEST_CASE("dropout is off at inference and seeded in training") {
  auto lex = testing::RandomLexicon({.words = 30, .dim = 5});
  const EncoderConfig cfg = Config(5, 4, 0.5);
  const ModelParams p = RandomEncoderParams(cfg, 2);
  const QueryBatch q = Single({3, 4, 5}, lex->vocab.pad_index());
  const auto eval1 = Encode(q, p, cfg, lex->embeddings, false, 1)[0];
  const auto eval2 = Encode(q, p, cfg, lex->embeddings, false, 2)[0];
  CHECK(std::ranges::equal(eval1.v.values(), eval2.v.values()));
  const auto tr1 = Encode(q, p, cfg, lex->embeddings, true, 1)[0];
  const auto tr1b = Encode(q, p, cfg, lex->embeddings, true, 1)[0];
  const auto tr2 = Encode(q, p, cfg, lex->embeddings, true, 2)[0];
  CHECK(std::ranges::equal(tr1.v.values(), tr1b.v.values()));
  CHECK(!std::ranges::equal(tr1.v.values(), tr2.v.values()));

  std::mt19937_64 rng(4);
  const Tensor m = DropoutMask(10000, 0.5, rng);
  std::size_t kept = 0;
  for (double x : m.values()) {
    CHECK((x == 0.0 || x == 2.0));
    kept += x != 0.0;
  }
  CHECK(kept > 4800);
  CHECK(kept < 5200);
}

TEST_CASE("shape mismatch") {
  auto lex = testing::RandomLexicon({.words = 10, .dim = 4});
  const EncoderConfig cfg = Config(5, 3);
  CHECK_THROWS_AS(Encode(Single({1}, lex->vocab.pad_index()),
                         RandomEncoderParams(cfg, 1), cfg, lex->embeddings,
                         false, 0),
                  DimensionError);
}

}  // TEST_SUITE
