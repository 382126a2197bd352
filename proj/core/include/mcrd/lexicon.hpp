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
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mcrd/tensor.hpp"

namespace mcrd {

/// Dense bijection between words and indices [0, size()). Two sentinel
/// indices sit just past the end: unknown tokens and padding. Both map to
/// the zero embedding.
class Vocabulary {
 public:
  Vocabulary() = default;
  /// Throws ValidationError on duplicate words.
  explicit Vocabulary(std::vector<std::string> words);

  std::size_t size() const { return words_.size(); }
  const std::string& word(std::size_t index) const { return words_.at(index); }
  const std::vector<std::string>& words() const { return words_; }
  std::optional<std::size_t> Find(std::string_view word) const;
  /// Throws RangeError for words outside the vocabulary.
  std::size_t IndexOf(std::string_view word) const;

  std::size_t unk_index() const { return words_.size(); }
  std::size_t pad_index() const { return words_.size() + 1; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Fixed |W| x d matrix of pretrained word vectors. Never updated by training.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  explicit EmbeddingMatrix(Tensor matrix);

  std::size_t dim() const { return matrix_ ? matrix_->cols() : 0; }
  std::size_t rows() const { return matrix_ ? matrix_->rows() : 0; }
  const Tensor& matrix() const { return *matrix_; }
  /// Shared, immutable handle for graph ops that read the whole matrix.
  std::shared_ptr<const Tensor> shared() const { return matrix_; }
  /// Row for `index`; the UNK and PAD sentinels (and anything beyond) read
  /// as zeros.
  std::span<const double> Row(std::size_t index) const;

 private:
  std::shared_ptr<const Tensor> matrix_;
  std::vector<double> zeros_;
};

struct Embeddings {
  Vocabulary vocab;
  EmbeddingMatrix matrix;
};

/// Text format: header "<count> <dim>", then "<word> <dim floats>" per line.
Embeddings ParseEmbeddings(std::istream& in);
Embeddings LoadEmbeddings(const std::filesystem::path& path);
void WriteEmbeddings(std::ostream& out, const Vocabulary& vocab,
                     const EmbeddingMatrix& matrix);

struct FeatureRegistry {
  std::vector<std::string> pos;
  std::vector<std::string> morphemes;
  std::vector<std::string> sememes;
  std::vector<std::size_t> category_layers;  // c_1..c_K

  std::size_t layer_count() const { return category_layers.size(); }
  friend bool operator==(const FeatureRegistry&,
                         const FeatureRegistry&) = default;
};

struct WordFeatures {
  std::vector<std::size_t> pos;        // sorted, unique
  std::vector<std::size_t> morphemes;  // sorted, unique
  std::vector<std::size_t> sememes;    // sorted, unique
  std::vector<std::optional<std::size_t>> categories;  // one per layer

  friend bool operator==(const WordFeatures&, const WordFeatures&) = default;
};

/// Per-word characteristic sets plus the registries they index into.
class WordFeatureTable {
 public:
  WordFeatureTable() = default;
  /// Every word starts with empty feature sets.
  WordFeatureTable(FeatureRegistry registry, std::size_t vocab_size);

  const FeatureRegistry& registry() const { return registry_; }
  std::size_t vocab_size() const { return words_.size(); }
  const WordFeatures& features(std::size_t word) const {
    return words_.at(word);
  }
  /// Replaces a word's record after normalizing and validating it.
  void Set(std::size_t word, WordFeatures features,
           std::string_view word_name = {});
  /// n_w: number of POS tags carried by the word.
  std::size_t pos_tag_count(std::size_t word) const {
    return words_.at(word).pos.size();
  }
  std::size_t skipped_records() const { return skipped_; }
  void set_skipped_records(std::size_t n) { skipped_ = n; }

  std::optional<std::size_t> FindPos(std::string_view name) const;

  /// Exhaustive range check of every stored index; throws ValidationError.
  void Validate() const;

  friend bool operator==(const WordFeatureTable& a,
                         const WordFeatureTable& b) {
    return a.registry_ == b.registry_ && a.words_ == b.words_;
  }

 private:
  FeatureRegistry registry_;
  std::vector<WordFeatures> words_;
  std::size_t skipped_ = 0;
};

/// JSON-lines: a registry object, then one record per word.
WordFeatureTable ParseFeatureTable(std::istream& in, const Vocabulary& vocab);
WordFeatureTable LoadFeatureTable(const std::filesystem::path& path,
                                  const Vocabulary& vocab);
/// Writes records only for words with at least one feature.
void WriteFeatureTable(std::ostream& out, const WordFeatureTable& table,
                       const Vocabulary& vocab);

/// Lowercases ASCII, splits on whitespace, strips ASCII punctuation from both
/// ends of each token. Unknown tokens map to vocab.unk_index(). Throws
/// EmptyQueryError when nothing is left.
std::vector<std::size_t> Tokenize(std::string_view text,
                                  const Vocabulary& vocab);

enum class Split { kTrain, kSeen, kUnseen, kDescription };
const char* SplitName(Split split);

struct DefinitionEntry {
  std::size_t target;
  std::vector<std::size_t> tokens;
};

struct DefinitionDataset {
  Split split = Split::kTrain;
  std::vector<DefinitionEntry> entries;
  std::size_t rejected = 0;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
};

/// UTF-8 TSV, "word<TAB>definition" per line. Lines whose target is not in
/// the vocabulary or whose definition has no tokens are rejected and counted.
DefinitionDataset ParseDataset(std::istream& in, const Vocabulary& vocab,
                               Split split = Split::kTrain);
DefinitionDataset LoadDataset(const std::filesystem::path& path,
                              const Vocabulary& vocab,
                              Split split = Split::kTrain);

/// Padded B x T token matrix with lengths, mask and targets.
struct QueryBatch {
  std::size_t max_length = 0;
  std::vector<std::size_t> tokens;  // row-major B x max_length
  std::vector<std::size_t> lengths;
  std::vector<std::uint8_t> mask;   // row-major B x max_length
  std::vector<std::size_t> targets;

  std::size_t size() const { return lengths.size(); }
  std::span<const std::size_t> Row(std::size_t i) const {
    return std::span<const std::size_t>(tokens).subspan(i * max_length,
                                                        max_length);
  }
  std::span<const std::uint8_t> MaskRow(std::size_t i) const {
    return std::span<const std::uint8_t>(mask).subspan(i * max_length,
                                                       max_length);
  }
  /// The first lengths[i] tokens of row i.
  std::span<const std::size_t> ValidTokens(std::size_t i) const {
    return Row(i).first(lengths[i]);
  }
};

/// Pads the given entries into one batch. Throws EmptyInputError on an empty
/// sequence.
QueryBatch MakeBatch(std::span<const DefinitionEntry> entries,
                     std::size_t pad_index);

/// Shuffles once with `seed`, then chunks; the last partial batch is kept.
std::vector<QueryBatch> MakeBatches(const DefinitionDataset& dataset,
                                    std::size_t batch_size,
                                    std::uint64_t seed,
                                    std::size_t pad_index);

/// SHA-256 (hex) of the vocabulary order and embedding values.
std::string EmbeddingsHash(const Vocabulary& vocab,
                           const EmbeddingMatrix& matrix);
/// SHA-256 (hex) of the canonical serialization of the feature table.
std::string FeatureTableHash(const WordFeatureTable& table,
                             const Vocabulary& vocab);
std::string Sha256Hex(std::string_view bytes);

}  // namespace mcrd
