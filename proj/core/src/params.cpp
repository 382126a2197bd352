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

#include "mcrd/params.hpp"

#include <cmath>

#include "mcrd/errors.hpp"

namespace mcrd {
namespace names {

std::string CategoryWeight(std::size_t layer) {
  return "cat." + std::to_string(layer) + ".W";
}
std::string CategoryBias(std::size_t layer) {
  return "cat." + std::to_string(layer) + ".b";
}

}  // namespace names

namespace {

Tensor GlorotUniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t({rows, cols});
  for (double& v : t.values()) v = dist(rng);
  return t;
}

}  // namespace

ModelParams InitParams(const EncoderConfig& encoder,
                       const FeatureRegistry& registry, std::mt19937_64& rng) {
  encoder.Validate();
  const std::size_t d = encoder.input_dim;
  const std::size_t l = encoder.hidden;
  ModelParams p;
  // Fixed creation order keeps initialization reproducible for a seed.
  auto linear = [&](const std::string& w, const std::string& b,
                    std::size_t out, std::size_t in) {
    p[w] = GlorotUniform(out, in, rng);
    p[b] = Tensor({out});
  };
  linear(names::kLstmForwardWeight, names::kLstmForwardBias, 4 * l, d + l);
  linear(names::kLstmBackwardWeight, names::kLstmBackwardBias, 4 * l, d + l);
  linear(names::kWordWeight, names::kWordBias, d, 2 * l);
  if (!registry.pos.empty()) {
    linear(names::kPosWeight, names::kPosBias, registry.pos.size(), 2 * l);
  }
  if (!registry.morphemes.empty()) {
    linear(names::kMorphemeWeight, names::kMorphemeBias,
           registry.morphemes.size(), 2 * l);
  }
  for (std::size_t k = 0; k < registry.layer_count(); ++k) {
    linear(names::CategoryWeight(k + 1), names::CategoryBias(k + 1),
           registry.category_layers[k], 2 * l);
  }
  if (!registry.sememes.empty()) {
    linear(names::kSememeWeight, names::kSememeBias, registry.sememes.size(),
           2 * l);
  }
  return p;
}

ad::NodeId Binding::at(const std::string& name) const {
  const auto it = params.find(name);
  if (it == params.end()) throw Error("model has no parameter '" + name + "'");
  return it->second;
}

Binding Bind(ad::Graph& g, const ModelParams& params, bool trainable) {
  Binding b;
  for (const auto& [name, value] : params) {
    b.params[name] = trainable ? g.Parameter(name, value) : g.Constant(value);
  }
  return b;
}

}  // namespace mcrd
