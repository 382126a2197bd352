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

#include "mcrd/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <unordered_set>

#include "mcrd/errors.hpp"

namespace mcrd {
namespace {

constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n",
                                   "p", "r", "s", "t", "v", "z", "br", "st",
                                   "tr", "pl", "gr", "sh"};
constexpr const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou", "ee"};

class NameSource {
 public:
  explicit NameSource(std::mt19937_64& rng) : rng_(rng) {}

  /// A fresh pronounceable string not handed out before.
  std::string Fresh(std::size_t syllables) {
    for (;;) {
      std::string s;
      for (std::size_t i = 0; i < syllables; ++i) {
        s += kOnsets[Pick(std::size(kOnsets))];
        s += kVowels[Pick(std::size(kVowels))];
      }
      if (used_.insert(s).second) return s;
    }
  }
  bool Claim(const std::string& s) { return used_.insert(s).second; }

 private:
  std::size_t Pick(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }
  std::mt19937_64& rng_;
  std::unordered_set<std::string> used_;
};

std::vector<std::size_t> Sample(std::size_t population, std::size_t k,
                                std::mt19937_64& rng) {
  std::vector<std::size_t> all(population);
  for (std::size_t i = 0; i < population; ++i) all[i] = i;
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::min(k, population));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

SyntheticCorpus GenerateCorpus(const SyntheticOptions& o) {
  if (o.words == 0 || o.dim == 0 || o.morphemes < 2 || o.sememes == 0 ||
      o.cues_per_feature == 0 || o.definitions_per_word == 0) {
    throw ValidationError("synthetic corpus options out of range");
  }
  std::mt19937_64 rng(o.seed);
  NameSource names(rng);
  std::normal_distribution<double> normal(0.0, 1.0);

  FeatureRegistry registry;
  for (std::size_t i = 0; i < o.morphemes; ++i) registry.morphemes.push_back(names.Fresh(1));
  for (std::size_t i = 0; i < o.sememes; ++i) registry.sememes.push_back("sem_" + names.Fresh(2));
  for (std::size_t i = 0; i < o.pos_tags; ++i) registry.pos.push_back("pos_" + std::to_string(i));
  registry.category_layers = o.category_layers;

  // Cue words: each feature gets its own small set of description words.
  auto make_cues = [&](std::size_t count) {
    std::vector<std::vector<std::string>> cues(count);
    for (auto& c : cues) {
      for (std::size_t k = 0; k < o.cues_per_feature; ++k) c.push_back(names.Fresh(3));
    }
    return cues;
  };
  const auto mor_cues = make_cues(o.morphemes);
  const auto sem_cues = make_cues(o.sememes);
  const auto pos_cues = make_cues(o.pos_tags);
  const std::size_t leaf_categories =
      o.category_layers.empty() ? 0 : o.category_layers.back();
  const auto cat_cues = make_cues(leaf_categories);
  std::vector<std::string> fillers;
  for (std::size_t i = 0; i < o.filler_words; ++i) fillers.push_back(names.Fresh(2));

  // Targets: two distinct morphemes each, spelled as their concatenation.
  const std::size_t total_targets = o.words + o.heldout_words;
  std::vector<std::string> target_names;
  std::vector<WordFeatures> target_features;
  std::set<std::pair<std::size_t, std::size_t>> used_pairs;
  std::uniform_int_distribution<std::size_t> pick_mor(0, o.morphemes - 1);
  std::size_t attempts = 0;
  while (target_names.size() < total_targets) {
    if (++attempts > 1000 * total_targets) {
      throw ValidationError("not enough morpheme pairs for the requested words");
    }
    const std::size_t a = pick_mor(rng), b = pick_mor(rng);
    if (a == b || used_pairs.contains({a, b})) continue;
    const std::string name = registry.morphemes[a] + registry.morphemes[b];
    if (!names.Claim(name)) continue;
    used_pairs.insert({a, b});

    WordFeatures f;
    f.morphemes = {a, b};
    f.sememes = Sample(o.sememes, o.sememes_per_word, rng);
    if (o.pos_tags > 0) {
      f.pos = {std::uniform_int_distribution<std::size_t>(0, o.pos_tags - 1)(rng)};
    }
    if (!o.category_layers.empty()) {
      const std::size_t leaf =
          std::uniform_int_distribution<std::size_t>(0, leaf_categories - 1)(rng);
      f.categories.resize(o.category_layers.size());
      // Coarser layers hold the leaf's ancestor: index scaled by layer size.
      for (std::size_t k = 0; k < o.category_layers.size(); ++k) {
        f.categories[k] = leaf * o.category_layers[k] / leaf_categories;
      }
    }
    std::sort(f.morphemes.begin(), f.morphemes.end());
    target_names.push_back(name);
    target_features.push_back(std::move(f));
  }

  // Vocabulary: targets, then cue words, then fillers.
  std::vector<std::string> vocab_words = target_names;
  for (const auto* group : {&mor_cues, &sem_cues, &pos_cues, &cat_cues}) {
    for (const auto& cues : *group) vocab_words.insert(vocab_words.end(), cues.begin(), cues.end());
  }
  vocab_words.insert(vocab_words.end(), fillers.begin(), fillers.end());

  // Embeddings: feature prototypes blended with word-specific noise.
  auto random_vector = [&] {
    std::vector<double> v(o.dim);
    for (double& x : v) x = o.embedding_norm * normal(rng) /
          std::sqrt(static_cast<double>(o.dim));
    return v;
  };
  std::vector<std::vector<double>> mor_proto(o.morphemes), sem_proto(o.sememes);
  for (auto& p : mor_proto) p = random_vector();
  for (auto& p : sem_proto) p = random_vector();
  std::vector<double> values;
  values.reserve(vocab_words.size() * o.dim);
  for (std::size_t w = 0; w < vocab_words.size(); ++w) {
    std::vector<double> e = random_vector();
    if (w < target_features.size()) {
      std::vector<double> signal(o.dim, 0.0);
      for (std::size_t m : target_features[w].morphemes) {
        for (std::size_t k = 0; k < o.dim; ++k) signal[k] += mor_proto[m][k];
      }
      for (std::size_t s : target_features[w].sememes) {
        for (std::size_t k = 0; k < o.dim; ++k) signal[k] += sem_proto[s][k];
      }
      for (std::size_t k = 0; k < o.dim; ++k) {
        e[k] = o.embedding_signal * signal[k] + (1.0 - o.embedding_signal) * e[k];
      }
    }
    values.insert(values.end(), e.begin(), e.end());
  }

  SyntheticCorpus corpus;
  const std::size_t n_vocab = vocab_words.size();
  corpus.embeddings = Embeddings{
      Vocabulary(vocab_words),
      EmbeddingMatrix(Tensor({n_vocab, o.dim}, std::move(values)))};
  corpus.features = WordFeatureTable(registry, n_vocab);
  for (std::size_t w = 0; w < target_features.size(); ++w) {
    corpus.features.Set(w, target_features[w], target_names[w]);
  }

  // Definitions: one cue per feature plus fillers, in random order.
  auto pick = [&](const std::vector<std::string>& from) -> const std::string& {
    return from[std::uniform_int_distribution<std::size_t>(0, from.size() - 1)(rng)];
  };
  auto definition = [&](const WordFeatures& f) {
    std::vector<std::string> tokens;
    for (std::size_t m : f.morphemes) tokens.push_back(pick(mor_cues[m]));
    for (std::size_t s : f.sememes) tokens.push_back(pick(sem_cues[s]));
    for (std::size_t p : f.pos) tokens.push_back(pick(pos_cues[p]));
    if (!f.categories.empty() && f.categories.back()) {
      tokens.push_back(pick(cat_cues[*f.categories.back()]));
    }
    for (std::size_t i = 0; i < o.fillers_per_definition && !fillers.empty(); ++i) {
      tokens.push_back(pick(fillers));
    }
    std::shuffle(tokens.begin(), tokens.end(), rng);
    std::string text;
    for (const auto& t : tokens) {
      if (!text.empty()) text += ' ';
      text += t;
    }
    return text;
  };
  for (std::size_t w = 0; w < total_targets; ++w) {
    const bool heldout = w >= o.words;
    if (heldout) corpus.heldout_targets.push_back(target_names[w]);
    for (std::size_t k = 0; k < o.definitions_per_word; ++k) {
      auto& pairs = heldout ? corpus.unseen_pairs : corpus.train_pairs;
      pairs.emplace_back(target_names[w], definition(target_features[w]));
    }
  }
  return corpus;
}

void WriteCorpus(const SyntheticCorpus& corpus,
                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("embeddings.txt");
    WriteEmbeddings(out, corpus.embeddings.vocab, corpus.embeddings.matrix);
  }
  {
    auto out = open("features.jsonl");
    WriteFeatureTable(out, corpus.features, corpus.embeddings.vocab);
  }
  auto write_pairs = [&](const char* name, const auto& pairs) {
    auto out = open(name);
    for (const auto& [word, text] : pairs) out << word << '\t' << text << '\n';
  };
  write_pairs("train.tsv", corpus.train_pairs);
  if (!corpus.unseen_pairs.empty()) write_pairs("unseen.tsv", corpus.unseen_pairs);
}

}  // namespace mcrd
