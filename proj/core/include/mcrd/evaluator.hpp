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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcrd/lexicon.hpp"
#include "mcrd/model.hpp"

namespace mcrd {

/// What the user remembers about the target word. Unset fields do not
/// constrain.
struct PriorKnowledge {
  std::optional<std::size_t> pos;             // index into the POS registry
  std::optional<std::string> initial_letter;  // one UTF-8 code point, folded
  std::optional<std::size_t> word_length;     // in code points

  bool any() const { return pos || initial_letter || word_length; }
};

/// Which single prior field the evaluation harness reveals per query.
enum class PriorField { kNone, kPos, kInitialLetter, kWordLength };

PriorField ParsePriorField(std::string_view name);
const char* PriorFieldName(PriorField field);

/// The prior-knowledge window: filtering looks at this many top results.
inline constexpr std::size_t kPriorWindow = 1000;

struct EvalReport {
  std::vector<std::size_t> ranks;  // 0-based, per query
  std::size_t median_rank = 0;     // lower median
  double acc1 = 0.0;
  double acc10 = 0.0;
  double acc100 = 0.0;
  double rank_std = 0.0;  // population standard deviation
  std::size_t count = 0;
};

/// Number of words ranked strictly ahead of `target` (descending score, ties
/// by ascending index).
std::size_t RankOfTarget(std::span<const double> scores, std::size_t target);

/// Throws EmptyInputError for an empty rank list.
EvalReport Metrics(std::span<const std::size_t> ranks);

/// Lowercases an ASCII initial; other code points are kept as-is. Throws
/// ValidationError unless `letter` is exactly one UTF-8 code point.
std::string FoldInitial(std::string_view letter);
std::size_t Utf8Length(std::string_view s);

bool SatisfiesPrior(std::size_t word, const PriorKnowledge& pk,
                    const WordFeatureTable& table, const Vocabulary& vocab);

/// Keeps, in order, the words that match every set field.
std::vector<std::size_t> ApplyPriorFilter(std::span<const std::size_t> ranked,
                                          const PriorKnowledge& pk,
                                          const WordFeatureTable& table,
                                          const Vocabulary& vocab);

/// The target's own value for `field`, as the harness reveals it. Returns an
/// empty PriorKnowledge when the target has no value (e.g. no POS tag).
PriorKnowledge PriorForTarget(PriorField field, std::size_t target,
                              const WordFeatureTable& table,
                              const Vocabulary& vocab);

/// Ranks every test query with dropout disabled. With a prior field, the
/// top-`window` list is filtered and the target is re-ranked within it; a
/// target outside the filtered list gets rank = filtered length.
EvalReport Evaluate(const Model& model, const DefinitionDataset& testset,
                    PriorField prior = PriorField::kNone,
                    std::size_t window = kPriorWindow);

nlohmann::json ReportToJson(const EvalReport& report, bool with_ranks = false);

/// Aligned table: median rank | acc@1/10/100 | rank variance.
std::string FormatReportTable(const EvalReport& report, std::string_view label);

}  // namespace mcrd
