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

// Small builders shared by the unit tests, the acceptance suite and the
// benchmarks.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mcrd/lexicon.hpp"
#include "mcrd/model.hpp"
#include "mcrd/synthetic.hpp"

namespace mcrd::testing {

struct RandomLexiconOptions {
  std::size_t words = 50;
  std::size_t dim = 8;
  std::size_t pos = 4;
  std::size_t morphemes = 20;
  std::size_t sememes = 20;
  std::vector<std::size_t> layers = {3, 6};
  std::uint64_t seed = 7;
};

inline std::string WordName(std::size_t i) {
  static constexpr char kLetters[] = "abcdefghijklmnopqrstuvwxyz";
  std::string s(1, kLetters[i % 26]);
  s += "w" + std::to_string(i);
  return s;
}

/// Random embeddings in [-1, 1] and random feature sets; roughly a tenth of
/// the words carry no features at all.
inline std::shared_ptr<const Lexicon> RandomLexicon(
    const RandomLexiconOptions& o) {
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<std::string> words;
  for (std::size_t i = 0; i < o.words; ++i) words.push_back(WordName(i));
  Tensor m = Tensor::Zeros({o.words, o.dim});
  for (double& x : m.values()) x = unit(rng);
  Embeddings emb{Vocabulary(std::move(words)), EmbeddingMatrix(std::move(m))};

  FeatureRegistry reg;
  for (std::size_t i = 0; i < o.pos; ++i) reg.pos.push_back("p" + std::to_string(i));
  for (std::size_t i = 0; i < o.morphemes; ++i) {
    reg.morphemes.push_back("m" + std::to_string(i));
  }
  for (std::size_t i = 0; i < o.sememes; ++i) {
    reg.sememes.push_back("s" + std::to_string(i));
  }
  reg.category_layers = o.layers;
  WordFeatureTable table(reg, o.words);
  auto pick = [&](std::size_t n, std::size_t max_count) {
    std::vector<std::size_t> out;
    if (n == 0) return out;
    const std::size_t count = rng() % (max_count + 1);
    for (std::size_t k = 0; k < count; ++k) out.push_back(rng() % n);
    return out;
  };
  for (std::size_t w = 0; w < o.words; ++w) {
    if (rng() % 10 == 0) continue;
    WordFeatures f;
    f.pos = pick(o.pos, 2);
    f.morphemes = pick(o.morphemes, 3);
    f.sememes = pick(o.sememes, 3);
    for (std::size_t c : o.layers) {
      if (rng() % 5 == 0) {
        f.categories.push_back(std::nullopt);
      } else {
        f.categories.push_back(rng() % c);
      }
    }
    table.Set(w, std::move(f));
  }
  return std::make_shared<const Lexicon>(
      Lexicon::FromParts(std::move(emb), std::move(table)));
}

inline std::shared_ptr<const Lexicon> LexiconOf(const SyntheticCorpus& corpus) {
  return std::make_shared<const Lexicon>(
      Lexicon::FromParts(corpus.embeddings, corpus.features));
}

/// Queries of 1..max_len random tokens; about one token in eight is UNK.
inline DefinitionDataset RandomDataset(const Lexicon& lex, std::size_t n,
                                       std::size_t max_len,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DefinitionDataset ds;
  const std::size_t v = lex.vocab.size();
  for (std::size_t i = 0; i < n; ++i) {
    DefinitionEntry e;
    e.target = rng() % v;
    const std::size_t len = 1 + rng() % max_len;
    for (std::size_t t = 0; t < len; ++t) {
      e.tokens.push_back(rng() % 8 == 0 ? lex.vocab.unk_index() : rng() % v);
    }
    ds.entries.push_back(std::move(e));
  }
  return ds;
}

inline DefinitionDataset DatasetFromPairs(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const Vocabulary& vocab, Split split = Split::kTrain) {
  std::ostringstream tsv;
  for (const auto& [word, text] : pairs) tsv << word << '\t' << text << '\n';
  std::istringstream in(tsv.str());
  return ParseDataset(in, vocab, split);
}

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& stem) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            (stem + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace mcrd::testing
