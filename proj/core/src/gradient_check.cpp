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

#include "mcrd/gradient_check.hpp"

#include <algorithm>
#include <cmath>

#include "mcrd/errors.hpp"

namespace mcrd::ad {
namespace {

double Evaluate(const Objective& objective, const NamedTensors& params) {
  Graph g;
  return g.value(objective(g, params)).item();
}

}  // namespace

GradCheckResult GradientCheck(const Objective& objective, NamedTensors params,
                              double epsilon) {
  if (!(epsilon > 0)) throw RangeError("gradient_check: epsilon must be > 0");
  Graph g;
  const NodeId loss = objective(g, params);
  g.Backward(loss);
  const NamedTensors analytic = g.ParameterGradients();

  GradCheckResult result;
  for (auto& [name, tensor] : params) {
    const auto found = analytic.find(name);
    if (found == analytic.end()) {
      throw Error("gradient_check: objective did not register '" + name + "'");
    }
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      const double saved = tensor[i];
      tensor[i] = saved + epsilon;
      const double plus = Evaluate(objective, params);
      tensor[i] = saved - epsilon;
      const double minus = Evaluate(objective, params);
      tensor[i] = saved;

      const double numeric = (plus - minus) / (2.0 * epsilon);
      const double exact = found->second[i];
      const double denom =
          std::max({std::abs(exact), std::abs(numeric), 1e-8});
      const double abs_err = std::abs(exact - numeric);
      const double rel = abs_err / denom;
      ++result.components_checked;
      result.max_absolute_error = std::max(result.max_absolute_error, abs_err);
      if (rel > result.max_relative_error || result.components_checked == 1) {
        result.max_relative_error = rel;
        result.worst_parameter = name;
        result.worst_index = i;
        result.analytic = exact;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace mcrd::ad
