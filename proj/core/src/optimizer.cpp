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

#include "mcrd/optimizer.hpp"

#include <cmath>

#include "mcrd/errors.hpp"

namespace mcrd {

AdamState MakeAdamState(const ModelParams& params) {
  AdamState s;
  for (const auto& [name, p] : params) {
    s.m.emplace(name, Tensor::ZerosLike(p));
    s.v.emplace(name, Tensor::ZerosLike(p));
  }
  return s;
}

void AdamStep(ModelParams& params, const Gradients& grads, AdamState& state,
              double learning_rate) {
  for (const auto& [name, p] : params) {
    const auto g = grads.find(name);
    if (g == grads.end()) throw Error("no gradient for '" + name + "'");
    if (g->second.shape() != p.shape() || state.m.at(name).shape() != p.shape()) {
      throw DimensionError("adam: shape mismatch for '" + name + "'");
    }
    for (std::size_t i = 0; i < g->second.size(); ++i) {
      if (!std::isfinite(g->second[i])) {
        throw DivergenceError("non-finite gradient in '" + name + "'[" +
                              std::to_string(i) + "] at step " +
                              std::to_string(state.step + 1));
      }
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (auto& [name, p] : params) {
    const Tensor& g = grads.at(name);
    Tensor& m = state.m.at(name);
    Tensor& v = state.v.at(name);
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

double GradientNorm(const Gradients& grads) {
  double sq = 0.0;
  for (const auto& [name, g] : grads) {
    for (double x : g.values()) sq += x * x;
  }
  return std::sqrt(sq);
}

double ClipGradients(Gradients& grads, double max_norm) {
  const double norm = GradientNorm(grads);
  if (max_norm > 0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& [name, g] : grads) {
      for (double& x : g.values()) x *= scale;
    }
  }
  return norm;
}

}  // namespace mcrd
