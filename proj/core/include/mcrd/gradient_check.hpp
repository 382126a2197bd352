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

#include "mcrd/graph.hpp"
#include "mcrd/tensor.hpp"

namespace mcrd::ad {

using NamedTensors = std::map<std::string, Tensor>;

/// Builds a scalar objective on `g`, registering each entry of `params` with
/// g.Parameter(name, value). Must be deterministic.
using Objective = std::function<NodeId(Graph& g, const NamedTensors& params)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t components_checked = 0;
  /// Largest |analytic - numeric| over all components.
  double max_absolute_error = 0.0;
};

/// Compares reverse-mode gradients against central differences
/// (f(p + eps) - f(p - eps)) / (2 eps) for every parameter component. The
/// relative error denominator is max(|analytic|, |numeric|, 1e-8).
GradCheckResult GradientCheck(const Objective& objective, NamedTensors params,
                              double epsilon);

}  // namespace mcrd::ad
