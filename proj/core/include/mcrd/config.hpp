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
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mcrd {

/// How attention scores become weights. kLiteral uses the raw dot products
/// h_t . h_i as weights; kSoftmax normalizes them over valid positions.
enum class AttentionMode { kLiteral, kSoftmax };

struct EncoderConfig {
  std::size_t input_dim = 300;  // d, taken from the embedding file
  std::size_t hidden = 300;     // l, per direction
  AttentionMode attention = AttentionMode::kLiteral;
  double dropout = 0.5;

  void Validate() const;
};

/// Fusion weights. beta has one entry per category layer; an empty beta means
/// 1.0 for every layer.
struct ChannelWeights {
  double word = 1.0;
  double pos = 1.0;
  double mor = 1.0;
  double cat = 1.0;
  double sem = 1.0;
  std::vector<double> beta;

  double BetaFor(std::size_t layer) const {
    return layer < beta.size() ? beta[layer] : 1.0;
  }
  void Validate() const;
};

enum class LossMode { kSoftmax, kOneVsAllSigmoid };

struct TrainConfig {
  // Data, resolved relative to the config file's directory.
  std::filesystem::path embeddings;
  std::filesystem::path features;
  std::filesystem::path train;
  std::filesystem::path seen;  // optional; falls back to the training set
  std::filesystem::path checkpoint = "model.mcrd";
  std::filesystem::path log = "train_log.jsonl";

  double learning_rate = 0.001;
  std::size_t batch_size = 128;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  LossMode loss = LossMode::kSoftmax;
  double clip_norm = 0.0;  // 0 disables clipping

  EncoderConfig encoder;
  ChannelWeights channels;

  void Validate() const;
};

const char* AttentionModeName(AttentionMode mode);
AttentionMode ParseAttentionMode(const std::string& name);
const char* LossModeName(LossMode mode);
LossMode ParseLossMode(const std::string& name);

void to_json(nlohmann::json& j, const EncoderConfig& c);
void from_json(const nlohmann::json& j, EncoderConfig& c);
void to_json(nlohmann::json& j, const ChannelWeights& c);
void from_json(const nlohmann::json& j, ChannelWeights& c);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

/// Reads a JSON config; relative data paths are resolved against the
/// directory containing the file.
TrainConfig LoadTrainConfig(const std::filesystem::path& path);

}  // namespace mcrd
