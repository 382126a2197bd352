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

#include "mcrd/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <fmt/core.h>

#include "mcrd/errors.hpp"

namespace mcrd {

PriorField ParsePriorField(std::string_view name) {
  if (name.empty() || name == "none") return PriorField::kNone;
  if (name == "pos") return PriorField::kPos;
  if (name == "initial-letter") return PriorField::kInitialLetter;
  if (name == "word-length") return PriorField::kWordLength;
  throw ValidationError("unknown prior '" + std::string(name) +
                        "' (expected pos, initial-letter or word-length)");
}

const char* PriorFieldName(PriorField field) {
  switch (field) {
    case PriorField::kNone: return "none";
    case PriorField::kPos: return "pos";
    case PriorField::kInitialLetter: return "initial-letter";
    case PriorField::kWordLength: return "word-length";
  }
  return "none";
}

std::size_t RankOfTarget(std::span<const double> scores, std::size_t target) {
  if (target >= scores.size()) {
    throw RangeError("target " + std::to_string(target) + " outside " +
                     std::to_string(scores.size()) + " scores");
  }
  const double s = scores[target];
  std::size_t ahead = 0;
  for (std::size_t w = 0; w < scores.size(); ++w) {
    if (scores[w] > s || (scores[w] == s && w < target)) ++ahead;
  }
  return ahead;
}

EvalReport Metrics(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw EmptyInputError("metrics over an empty rank list");
  EvalReport r;
  r.ranks.assign(ranks.begin(), ranks.end());
  r.count = ranks.size();
  std::size_t hit1 = 0, hit10 = 0, hit100 = 0;
  double sum = 0.0;
  for (std::size_t rank : ranks) {
    hit1 += rank < 1;
    hit10 += rank < 10;
    hit100 += rank < 100;
    sum += static_cast<double>(rank);
  }
  const double n = static_cast<double>(r.count);
  r.acc1 = static_cast<double>(hit1) / n;
  r.acc10 = static_cast<double>(hit10) / n;
  r.acc100 = static_cast<double>(hit100) / n;
  const double mean = sum / n;
  double sq = 0.0;
  for (std::size_t rank : ranks) {
    const double d = static_cast<double>(rank) - mean;
    sq += d * d;
  }
  r.rank_std = std::sqrt(sq / n);
  std::vector<std::size_t> sorted(ranks.begin(), ranks.end());
  std::sort(sorted.begin(), sorted.end());
  r.median_rank = sorted[(sorted.size() - 1) / 2];
  return r;
}

std::size_t Utf8Length(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) n += (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  return n;
}

std::string FoldInitial(std::string_view letter) {
  if (Utf8Length(letter) != 1) {
    throw ValidationError("initial letter must be a single character");
  }
  std::string out(letter);
  const auto c = static_cast<unsigned char>(out[0]);
  if (c < 0x80) out[0] = static_cast<char>(std::tolower(c));
  return out;
}

namespace {

std::string FirstCodePoint(std::string_view word) {
  if (word.empty()) return {};
  std::size_t len = 1;
  while (len < word.size() &&
         (static_cast<unsigned char>(word[len]) & 0xC0) == 0x80) {
    ++len;
  }
  return FoldInitial(word.substr(0, len));
}

}  // namespace

bool SatisfiesPrior(std::size_t word, const PriorKnowledge& pk,
                    const WordFeatureTable& table, const Vocabulary& vocab) {
  const std::string& w = vocab.word(word);
  if (pk.pos) {
    const auto& tags = table.features(word).pos;
    if (!std::binary_search(tags.begin(), tags.end(), *pk.pos)) return false;
  }
  if (pk.initial_letter && FirstCodePoint(w) != *pk.initial_letter) {
    return false;
  }
  if (pk.word_length && Utf8Length(w) != *pk.word_length) return false;
  return true;
}

std::vector<std::size_t> ApplyPriorFilter(std::span<const std::size_t> ranked,
                                          const PriorKnowledge& pk,
                                          const WordFeatureTable& table,
                                          const Vocabulary& vocab) {
  std::vector<std::size_t> kept;
  for (std::size_t w : ranked) {
    if (SatisfiesPrior(w, pk, table, vocab)) kept.push_back(w);
  }
  return kept;
}

PriorKnowledge PriorForTarget(PriorField field, std::size_t target,
                              const WordFeatureTable& table,
                              const Vocabulary& vocab) {
  PriorKnowledge pk;
  switch (field) {
    case PriorField::kNone:
      break;
    case PriorField::kPos: {
      const auto& tags = table.features(target).pos;
      if (!tags.empty()) pk.pos = tags.front();
      break;
    }
    case PriorField::kInitialLetter:
      pk.initial_letter = FirstCodePoint(vocab.word(target));
      break;
    case PriorField::kWordLength:
      pk.word_length = Utf8Length(vocab.word(target));
      break;
  }
  return pk;
}

EvalReport Evaluate(const Model& model, const DefinitionDataset& testset,
                    PriorField prior, std::size_t window) {
  if (testset.empty()) throw EmptyInputError("cannot evaluate an empty test set");
  const Lexicon& lex = model.lexicon();
  if (prior == PriorField::kPos && lex.features.registry().pos.empty()) {
    throw ValidationError("POS prior needs a POS registry in the feature table");
  }
  std::vector<std::size_t> ranks;
  ranks.reserve(testset.size());
  for (const DefinitionEntry& e : testset.entries) {
    const ScoredQuery scored = model.Score(e.tokens);
    const PriorKnowledge pk =
        PriorForTarget(prior, e.target, lex.features, lex.vocab);
    if (!pk.any()) {
      ranks.push_back(RankOfTarget(scored.fused, e.target));
      continue;
    }
    const std::vector<std::size_t> order = Rank(scored.fused);
    const std::span<const std::size_t> top(
        order.data(), std::min(window, order.size()));
    const auto filtered = ApplyPriorFilter(top, pk, lex.features, lex.vocab);
    const auto it = std::find(filtered.begin(), filtered.end(), e.target);
    ranks.push_back(static_cast<std::size_t>(it - filtered.begin()));
  }
  return Metrics(ranks);
}

nlohmann::json ReportToJson(const EvalReport& r, bool with_ranks) {
  nlohmann::json j = {{"count", r.count},
                      {"median_rank", r.median_rank},
                      {"acc1", r.acc1},
                      {"acc10", r.acc10},
                      {"acc100", r.acc100},
                      {"rank_std", r.rank_std},
                      {"rank_variance", r.rank_std}};
  if (with_ranks) j["ranks"] = r.ranks;
  return j;
}

std::string FormatReportTable(const EvalReport& r, std::string_view label) {
  auto acc = [](double v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    std::string s(buf);
    // Table style drops the leading zero: .66/.94/.95
    if (s.rfind("0.", 0) == 0) s.erase(0, 1);
    return s;
  };
  const int width = static_cast<int>(std::max<std::size_t>(16, label.size()));
  const std::string accs = acc(r.acc1) + "/" + acc(r.acc10) + "/" + acc(r.acc100);
  std::ostringstream out;
  out << fmt::format("{:<{}} {:>11}  {:<14}  {:>13}\n", "model", width,
                     "median rank", "acc@1/10/100", "rank variance");
  out << fmt::format("{:<{}} {:>11}  {:<14}  {:>13.0f}\n", label, width,
                     r.median_rank, accs, r.rank_std);
  return out.str();
}

}  // namespace mcrd
