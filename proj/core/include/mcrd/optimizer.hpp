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

#include <cstdint>
#include <map>
#include <string>

#include "mcrd/params.hpp"
#include "mcrd/tensor.hpp"

namespace mcrd {

using Gradients = std::map<std::string, Tensor>;

/// First and second moment estimates for every trainable tensor.
struct AdamState {
  std::map<std::string, Tensor> m;
  std::map<std::string, Tensor> v;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

AdamState MakeAdamState(const ModelParams& params);

/// One bias-corrected Adam update of every tensor in `params`. Throws
/// DivergenceError, naming the tensor and component, on a non-finite
/// gradient; nothing is updated in that case.
void AdamStep(ModelParams& params, const Gradients& grads, AdamState& state,
              double learning_rate);

/// Global L2 norm over all gradient tensors.
double GradientNorm(const Gradients& grads);

/// Rescales so the global norm is at most `max_norm`; returns the norm
/// before clipping.
double ClipGradients(Gradients& grads, double max_norm);

}  // namespace mcrd
