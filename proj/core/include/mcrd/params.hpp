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
#include <random>
#include <string>

#include "mcrd/config.hpp"
#include "mcrd/graph.hpp"
#include "mcrd/lexicon.hpp"
#include "mcrd/tensor.hpp"

namespace mcrd {

/// Trainable weights by name. The embedding matrix is not part of this set.
using ModelParams = std::map<std::string, Tensor>;

namespace names {
inline constexpr const char* kLstmForwardWeight = "lstm.fwd.W";
inline constexpr const char* kLstmForwardBias = "lstm.fwd.b";
inline constexpr const char* kLstmBackwardWeight = "lstm.bwd.W";
inline constexpr const char* kLstmBackwardBias = "lstm.bwd.b";
inline constexpr const char* kWordWeight = "word.W";
inline constexpr const char* kWordBias = "word.b";
inline constexpr const char* kPosWeight = "pos.W";
inline constexpr const char* kPosBias = "pos.b";
inline constexpr const char* kMorphemeWeight = "mor.W";
inline constexpr const char* kMorphemeBias = "mor.b";
inline constexpr const char* kSememeWeight = "sem.W";
inline constexpr const char* kSememeBias = "sem.b";
/// Category layer k (1-based): "cat.<k>.W" / "cat.<k>.b".
std::string CategoryWeight(std::size_t layer);
std::string CategoryBias(std::size_t layer);
}  // namespace names

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
/// Channel predictors are created only for non-empty registries.
ModelParams InitParams(const EncoderConfig& encoder,
                       const FeatureRegistry& registry, std::mt19937_64& rng);

/// Parameter leaves of one graph.
struct Binding {
  std::map<std::string, ad::NodeId> params;

  ad::NodeId at(const std::string& name) const;
  bool contains(const std::string& name) const {
    return params.contains(name);
  }
};

/// Registers every parameter: trainable leaves when `trainable`, constants
/// otherwise.
Binding Bind(ad::Graph& g, const ModelParams& params, bool trainable);

}  // namespace mcrd
