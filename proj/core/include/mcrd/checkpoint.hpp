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
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "mcrd/config.hpp"
#include "mcrd/model.hpp"
#include "mcrd/optimizer.hpp"
#include "mcrd/params.hpp"

namespace mcrd {

// Binary layout, all integers little-endian:
//
//   "MCRD" | u32 version | u32 section count | sections... | u32 CRC32
//
// Each section is u8 kind | u64 payload length | payload. Kind 1 holds the
// UTF-8 JSON metadata (config, lexicon hashes, epoch, RNG and Adam scalars);
// kind 2 holds one tensor: u32 name length | name | u32 rank | u64 dims... |
// f64 values. The CRC covers every byte before it.
inline constexpr char kCheckpointMagic[4] = {'M', 'C', 'R', 'D'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  nlohmann::json config;  // TrainConfig
  ModelParams params;
  AdamState adam;
  std::string embeddings_hash;
  std::string features_hash;
  std::uint64_t epoch = 0;
  std::string rng_state;  // std::mt19937_64 stream representation

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::string SerializeCheckpoint(const Checkpoint& ckpt);
/// Throws IntegrityError on bad magic, version, checksum or truncation.
Checkpoint DeserializeCheckpoint(std::string_view bytes);

void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

/// Throws IntegrityError when the lexicon is not the one the checkpoint was
/// trained against.
void VerifyLexicon(const Checkpoint& ckpt, const Lexicon& lexicon);

/// Rebuilds the model from checkpoint weights over an already-verified
/// lexicon.
Model ModelFromCheckpoint(const Checkpoint& ckpt,
                          std::shared_ptr<const Lexicon> lexicon);

/// Loads the checkpoint, its lexicon files (paths from the stored config),
/// verifies the hashes and returns the ready model.
Model LoadModel(const std::filesystem::path& checkpoint_path);

}  // namespace mcrd
