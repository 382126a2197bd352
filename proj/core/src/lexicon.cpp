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

#include "mcrd/lexicon.hpp"

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mcrd/errors.hpp"

namespace mcrd {
namespace {

using nlohmann::json;

std::ifstream OpenForRead(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

void StripCarriageReturn(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<std::string_view> SplitWhitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

bool IsAsciiPunct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u);
}

std::vector<std::size_t> ReadIndexSet(const json& record, const char* key,
                                      std::size_t line) {
  std::vector<std::size_t> out;
  if (!record.contains(key) || record[key].is_null()) return out;
  if (!record[key].is_array()) {
    throw ParseError(std::string("'") + key + "' must be an array", line);
  }
  for (const json& v : record[key]) {
    if (!v.is_number_unsigned()) {
      throw ParseError(std::string("'") + key +
                           "' entries must be non-negative integers",
                       line);
    }
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

void Normalize(std::vector<std::size_t>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

void CheckRange(const std::vector<std::size_t>& indices, std::size_t limit,
                std::string_view word, const char* feature) {
  for (std::size_t i : indices) {
    if (i >= limit) {
      throw ValidationError("word '" + std::string(word) + "': " + feature +
                            " index " + std::to_string(i) +
                            " outside registry of size " +
                            std::to_string(limit));
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- Vocabulary

Vocabulary::Vocabulary(std::vector<std::string> words)
    : words_(std::move(words)) {
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second) {
      throw ValidationError("duplicate word '" + words_[i] + "'");
    }
  }
}

std::optional<std::size_t> Vocabulary::Find(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::IndexOf(std::string_view word) const {
  if (auto i = Find(word)) return *i;
  throw RangeError("word '" + std::string(word) + "' not in vocabulary");
}

// ---------------------------------------------------------------- Embeddings

EmbeddingMatrix::EmbeddingMatrix(Tensor matrix) {
  if (matrix.rank() != 2) {
    throw DimensionError("embedding matrix must be 2-D, got " +
                         ShapeToString(matrix.shape()));
  }
  zeros_.assign(matrix.cols(), 0.0);
  matrix_ = std::make_shared<const Tensor>(std::move(matrix));
}

std::span<const double> EmbeddingMatrix::Row(std::size_t index) const {
  if (!matrix_ || index >= matrix_->rows()) return zeros_;
  return matrix_->row(index);
}

Embeddings ParseEmbeddings(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  StripCarriageReturn(line);
  const auto header = SplitWhitespace(line);
  std::size_t count = 0, dim = 0;
  auto parse_size = [&](std::string_view s, std::size_t& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
  };
  if (header.size() != 2 || !parse_size(header[0], count) ||
      !parse_size(header[1], dim) || dim == 0) {
    throw ParseError("header must be \"<count> <dim>\"", 1);
  }

  std::vector<std::string> words;
  std::vector<double> values;
  words.reserve(count);
  values.reserve(count * dim);
  std::unordered_map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++line_no;
    StripCarriageReturn(line);
    if (line.empty()) continue;
    const auto fields = SplitWhitespace(line);
    if (fields.size() != dim + 1) {
      throw ParseError("expected word and " + std::to_string(dim) +
                           " values, got " +
                           std::to_string(fields.empty() ? 0 : fields.size() - 1),
                       line_no);
    }
    std::string word(fields[0]);
    if (!seen.emplace(word, line_no).second) {
      throw ParseError("duplicate word '" + word + "'", line_no);
    }
    for (std::size_t k = 1; k <= dim; ++k) {
      double v = 0.0;
      auto [p, ec] =
          std::from_chars(fields[k].data(), fields[k].data() + fields[k].size(), v);
      if (ec != std::errc() || p != fields[k].data() + fields[k].size()) {
        throw ParseError("bad number '" + std::string(fields[k]) + "'", line_no);
      }
      values.push_back(v);
    }
    words.push_back(std::move(word));
  }
  if (words.size() != count) {
    throw ParseError("header declares " + std::to_string(count) +
                         " words, file has " + std::to_string(words.size()),
                     line_no);
  }
  if (words.empty()) throw ParseError("no embeddings", line_no);
  const std::size_t n = words.size();
  return Embeddings{Vocabulary(std::move(words)),
                    EmbeddingMatrix(Tensor({n, dim}, std::move(values)))};
}

Embeddings LoadEmbeddings(const std::filesystem::path& path) {
  auto in = OpenForRead(path);
  try {
    return ParseEmbeddings(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

void WriteEmbeddings(std::ostream& out, const Vocabulary& vocab,
                     const EmbeddingMatrix& matrix) {
  out << vocab.size() << ' ' << matrix.dim() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out << vocab.word(i);
    for (double v : matrix.Row(i)) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      out << ' ' << std::string_view(buf, p - buf);
    }
    out << '\n';
  }
}

// ------------------------------------------------------------ Feature table

WordFeatureTable::WordFeatureTable(FeatureRegistry registry,
                                   std::size_t vocab_size)
    : registry_(std::move(registry)) {
  for (std::size_t k = 0; k < registry_.category_layers.size(); ++k) {
    if (registry_.category_layers[k] == 0) {
      throw ValidationError("category layer " + std::to_string(k + 1) +
                            " has no categories");
    }
  }
  WordFeatures empty;
  empty.categories.assign(registry_.layer_count(), std::nullopt);
  words_.assign(vocab_size, empty);
}

void WordFeatureTable::Set(std::size_t word, WordFeatures features,
                           std::string_view word_name) {
  if (word >= words_.size()) {
    throw RangeError("word index " + std::to_string(word) + " out of range");
  }
  const std::string name =
      word_name.empty() ? "#" + std::to_string(word) : std::string(word_name);
  Normalize(features.pos);
  Normalize(features.morphemes);
  Normalize(features.sememes);
  if (features.categories.empty()) {
    features.categories.assign(registry_.layer_count(), std::nullopt);
  }
  CheckRange(features.pos, registry_.pos.size(), name, "pos");
  CheckRange(features.morphemes, registry_.morphemes.size(), name, "morpheme");
  CheckRange(features.sememes, registry_.sememes.size(), name, "sememe");
  if (features.categories.size() != registry_.layer_count()) {
    throw ValidationError("word '" + name + "': expected " +
                          std::to_string(registry_.layer_count()) +
                          " category entries, got " +
                          std::to_string(features.categories.size()));
  }
  for (std::size_t k = 0; k < features.categories.size(); ++k) {
    const auto& c = features.categories[k];
    if (c && *c >= registry_.category_layers[k]) {
      throw ValidationError("word '" + name + "': category index " +
                            std::to_string(*c) + " outside layer " +
                            std::to_string(k + 1) + " of size " +
                            std::to_string(registry_.category_layers[k]));
    }
  }
  words_[word] = std::move(features);
}

std::optional<std::size_t> WordFeatureTable::FindPos(
    std::string_view name) const {
  const auto it = std::find(registry_.pos.begin(), registry_.pos.end(), name);
  if (it == registry_.pos.end()) return std::nullopt;
  return static_cast<std::size_t>(it - registry_.pos.begin());
}

void WordFeatureTable::Validate() const {
  for (std::size_t w = 0; w < words_.size(); ++w) {
    const WordFeatures& f = words_[w];
    const std::string name = "#" + std::to_string(w);
    CheckRange(f.pos, registry_.pos.size(), name, "pos");
    CheckRange(f.morphemes, registry_.morphemes.size(), name, "morpheme");
    CheckRange(f.sememes, registry_.sememes.size(), name, "sememe");
    if (f.categories.size() != registry_.layer_count()) {
      throw ValidationError("word " + name + ": category layer count");
    }
    for (std::size_t k = 0; k < f.categories.size(); ++k) {
      if (f.categories[k] && *f.categories[k] >= registry_.category_layers[k]) {
        throw ValidationError("word " + name + ": category out of range");
      }
    }
  }
}

WordFeatureTable ParseFeatureTable(std::istream& in, const Vocabulary& vocab) {
  std::string line;
  std::size_t line_no = 0;
  json preamble;
  while (std::getline(in, line)) {
    ++line_no;
    StripCarriageReturn(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      preamble = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("registry: ") + e.what(), line_no);
    }
    break;
  }
  if (!preamble.is_object()) throw ParseError("missing registry object", line_no);

  FeatureRegistry registry;
  try {
    registry.pos = preamble.value("pos", std::vector<std::string>{});
    registry.morphemes = preamble.value("morphemes", std::vector<std::string>{});
    registry.sememes = preamble.value("sememes", std::vector<std::string>{});
    registry.category_layers =
        preamble.value("category_layers", std::vector<std::size_t>{});
  } catch (const json::exception& e) {
    throw ParseError(std::string("registry: ") + e.what(), line_no);
  }
  WordFeatureTable table(std::move(registry), vocab.size());
  const std::size_t layers = table.registry().layer_count();

  std::vector<bool> seen(vocab.size(), false);
  std::size_t skipped = 0;
  while (std::getline(in, line)) {
    ++line_no;
    StripCarriageReturn(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(e.what(), line_no);
    }
    if (!record.is_object() || !record.contains("word") ||
        !record["word"].is_string()) {
      throw ParseError("record needs a string \"word\"", line_no);
    }
    const std::string word = record["word"].get<std::string>();
    const auto index = vocab.Find(word);
    if (!index) {
      spdlog::warn("feature table line {}: '{}' not in vocabulary, skipped",
                   line_no, word);
      ++skipped;
      continue;
    }
    if (seen[*index]) {
      throw ValidationError("word '" + word + "': duplicate record at line " +
                            std::to_string(line_no));
    }
    seen[*index] = true;

    WordFeatures f;
    f.pos = ReadIndexSet(record, "pos", line_no);
    f.morphemes = ReadIndexSet(record, "mor", line_no);
    f.sememes = ReadIndexSet(record, "sem", line_no);
    f.categories.assign(layers, std::nullopt);
    if (record.contains("cat") && !record["cat"].is_null()) {
      const json& cat = record["cat"];
      if (!cat.is_array() || cat.size() != layers) {
        throw ValidationError("word '" + word + "': 'cat' must list " +
                              std::to_string(layers) + " layer entries");
      }
      for (std::size_t k = 0; k < layers; ++k) {
        if (cat[k].is_null()) continue;
        if (!cat[k].is_number_unsigned()) {
          throw ParseError("'cat' entries must be indices or null", line_no);
        }
        f.categories[k] = cat[k].get<std::size_t>();
      }
    }
    table.Set(*index, std::move(f), word);
  }
  table.set_skipped_records(skipped);
  table.Validate();
  return table;
}

WordFeatureTable LoadFeatureTable(const std::filesystem::path& path,
                                  const Vocabulary& vocab) {
  auto in = OpenForRead(path);
  return ParseFeatureTable(in, vocab);
}

void WriteFeatureTable(std::ostream& out, const WordFeatureTable& table,
                       const Vocabulary& vocab) {
  const FeatureRegistry& r = table.registry();
  json preamble = {{"pos", r.pos},
                   {"morphemes", r.morphemes},
                   {"sememes", r.sememes},
                   {"category_layers", r.category_layers}};
  out << preamble.dump() << '\n';
  for (std::size_t w = 0; w < table.vocab_size(); ++w) {
    const WordFeatures& f = table.features(w);
    const bool any_category =
        std::any_of(f.categories.begin(), f.categories.end(),
                    [](const auto& c) { return c.has_value(); });
    if (f.pos.empty() && f.morphemes.empty() && f.sememes.empty() &&
        !any_category) {
      continue;
    }
    json cat = json::array();
    for (const auto& c : f.categories) {
      cat.push_back(c ? json(*c) : json(nullptr));
    }
    json record = {{"word", vocab.word(w)},
                   {"pos", f.pos},
                   {"mor", f.morphemes},
                   {"cat", cat},
                   {"sem", f.sememes}};
    out << record.dump() << '\n';
  }
}

// ----------------------------------------------------------------- Tokenize

std::vector<std::size_t> Tokenize(std::string_view text,
                                  const Vocabulary& vocab) {
  std::vector<std::size_t> out;
  for (std::string_view raw : SplitWhitespace(text)) {
    while (!raw.empty() && IsAsciiPunct(raw.front())) raw.remove_prefix(1);
    while (!raw.empty() && IsAsciiPunct(raw.back())) raw.remove_suffix(1);
    if (raw.empty()) continue;
    std::string token(raw);
    for (char& c : token) {
      if (static_cast<unsigned char>(c) < 0x80) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
    }
    out.push_back(vocab.Find(token).value_or(vocab.unk_index()));
  }
  if (out.empty()) {
    throw EmptyQueryError("query has no tokens after normalization");
  }
  return out;
}

// ------------------------------------------------------------------ Dataset

const char* SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kSeen: return "seen";
    case Split::kUnseen: return "unseen";
    case Split::kDescription: return "description";
  }
  return "unknown";
}

DefinitionDataset ParseDataset(std::istream& in, const Vocabulary& vocab,
                               Split split) {
  DefinitionDataset dataset;
  dataset.split = split;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    StripCarriageReturn(line);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError("expected \"word<TAB>definition\"", line_no);
    }
    const std::string word = line.substr(0, tab);
    auto target = vocab.Find(word);
    if (!target) {
      std::string lowered = word;
      std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                     [](unsigned char c) {
                       return c < 0x80 ? std::tolower(c) : c;
                     });
      target = vocab.Find(lowered);
    }
    if (!target) {
      spdlog::warn("dataset line {}: target '{}' not in vocabulary, rejected",
                   line_no, word);
      ++dataset.rejected;
      continue;
    }
    try {
      dataset.entries.push_back(
          {*target, Tokenize(std::string_view(line).substr(tab + 1), vocab)});
    } catch (const EmptyQueryError&) {
      spdlog::warn("dataset line {}: empty definition, rejected", line_no);
      ++dataset.rejected;
    }
  }
  if (dataset.rejected > 0) {
    spdlog::warn("{} dataset: {} entries loaded, {} rejected",
                 SplitName(split), dataset.entries.size(), dataset.rejected);
  }
  return dataset;
}

DefinitionDataset LoadDataset(const std::filesystem::path& path,
                              const Vocabulary& vocab, Split split) {
  auto in = OpenForRead(path);
  try {
    return ParseDataset(in, vocab, split);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

// ------------------------------------------------------------------ Batches

QueryBatch MakeBatch(std::span<const DefinitionEntry> entries,
                     std::size_t pad_index) {
  QueryBatch batch;
  for (const auto& e : entries) {
    if (e.tokens.empty()) throw EmptyInputError("batch entry has no tokens");
    batch.max_length = std::max(batch.max_length, e.tokens.size());
  }
  const std::size_t t_len = batch.max_length;
  batch.tokens.assign(entries.size() * t_len, pad_index);
  batch.mask.assign(entries.size() * t_len, 0);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    std::copy(e.tokens.begin(), e.tokens.end(),
              batch.tokens.begin() + i * t_len);
    std::fill_n(batch.mask.begin() + i * t_len, e.tokens.size(), 1);
    batch.lengths.push_back(e.tokens.size());
    batch.targets.push_back(e.target);
  }
  return batch;
}

std::vector<QueryBatch> MakeBatches(const DefinitionDataset& dataset,
                                    std::size_t batch_size,
                                    std::uint64_t seed,
                                    std::size_t pad_index) {
  if (batch_size == 0) throw RangeError("batch size must be >= 1");
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<QueryBatch> batches;
  std::vector<DefinitionEntry> chunk;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    chunk.clear();
    const std::size_t end = std::min(order.size(), start + batch_size);
    for (std::size_t i = start; i < end; ++i) {
      chunk.push_back(dataset.entries[order[i]]);
    }
    batches.push_back(MakeBatch(chunk, pad_index));
  }
  return batches;
}

// ------------------------------------------------------------------- Hashes

std::string Sha256Hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(
      EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw Error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

std::string EmbeddingsHash(const Vocabulary& vocab,
                           const EmbeddingMatrix& matrix) {
  std::ostringstream out;
  WriteEmbeddings(out, vocab, matrix);
  return Sha256Hex(out.str());
}

std::string FeatureTableHash(const WordFeatureTable& table,
                             const Vocabulary& vocab) {
  std::ostringstream out;
  WriteFeatureTable(out, table, vocab);
  return Sha256Hex(out.str());
}

}  // namespace mcrd
