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
#include <utility>
#include <vector>

#include "mcrd/lexicon.hpp"

namespace mcrd {

/// Knobs for a generated toy corpus in which definitions are built from cue
/// words of the target's morphemes, sememes, category and POS tag.
struct SyntheticOptions {
  std::size_t words = 100;              // target words seen in training
  std::size_t heldout_words = 0;        // targets excluded from training
  std::size_t definitions_per_word = 2;
  std::size_t dim = 16;
  std::size_t pos_tags = 0;  // 0 leaves the POS registry empty
  std::size_t morphemes = 24;
  std::size_t sememes = 24;
  std::vector<std::size_t> category_layers = {4, 12};
  std::size_t sememes_per_word = 2;
  std::size_t cues_per_feature = 3;
  std::size_t filler_words = 30;
  std::size_t fillers_per_definition = 2;
  /// Weight of the feature-derived component in target embeddings; the rest
  /// is word-specific noise.
  double embedding_signal = 0.5;
  /// Expected Euclidean norm of a noise or prototype vector.
  double embedding_norm = 1.0;
  std::uint64_t seed = 1;
};

struct SyntheticCorpus {
  Embeddings embeddings;
  WordFeatureTable features;
  std::vector<std::pair<std::string, std::string>> train_pairs;
  std::vector<std::pair<std::string, std::string>> unseen_pairs;
  std::vector<std::string> heldout_targets;
};

SyntheticCorpus GenerateCorpus(const SyntheticOptions& options);

/// Writes embeddings.txt, features.jsonl, train.tsv and unseen.tsv (when
/// there are held-out words) into `dir`.
void WriteCorpus(const SyntheticCorpus& corpus,
                 const std::filesystem::path& dir);

}  // namespace mcrd
