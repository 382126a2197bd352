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

#include "mcrd/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "mcrd/errors.hpp"

namespace mcrd {
namespace {

using nlohmann::json;

constexpr std::uint8_t kMetaSection = 1;
constexpr std::uint8_t kTensorSection = 2;

constexpr const char* kParamPrefix = "param/";
constexpr const char* kMomentPrefix = "adam.m/";
constexpr const char* kVariancePrefix = "adam.v/";

class Writer {
 public:
  void U8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) U8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void U64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) U8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }
  void Bytes(std::string_view s) { out_.append(s); }
  std::string& str() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::uint8_t U8() {
    Need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint32_t U32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(U8()) << (8 * i);
    return v;
  }
  std::uint64_t U64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(U8()) << (8 * i);
    return v;
  }
  double F64() { return std::bit_cast<double>(U64()); }
  std::string_view Bytes(std::uint64_t n) {
    Need(n);
    const auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void Need(std::uint64_t n) const {
    if (n > in_.size() - pos_) throw IntegrityError("checkpoint truncated");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

std::uint32_t Crc32(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for very large files.
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - offset, 1u << 30);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + offset),
                static_cast<uInt>(n));
    offset += n;
  }
  return static_cast<std::uint32_t>(crc);
}

void WriteTensor(Writer& w, const std::string& name, const Tensor& t) {
  Writer payload;
  payload.U32(static_cast<std::uint32_t>(name.size()));
  payload.Bytes(name);
  payload.U32(static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) payload.U64(d);
  for (double v : t.values()) payload.F64(v);
  w.U8(kTensorSection);
  w.U64(payload.str().size());
  w.Bytes(payload.str());
}

std::pair<std::string, Tensor> ReadTensor(std::string_view bytes) {
  Reader r(bytes);
  std::string name(r.Bytes(r.U32()));
  const std::uint32_t rank = r.U32();
  Shape shape(rank);
  for (auto& d : shape) d = r.U64();
  const std::size_t n = ShapeSize(shape);
  if (rank == 0 || n == 0 || n * 8 != bytes.size() - (4 + name.size() + 4 + 8 * rank)) {
    throw IntegrityError("tensor '" + name + "' has inconsistent size");
  }
  std::vector<double> values(n);
  for (double& v : values) v = r.F64();
  return {std::move(name), Tensor(std::move(shape), std::move(values))};
}

bool StartsWith(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

}  // namespace

std::string SerializeCheckpoint(const Checkpoint& ckpt) {
  Writer w;
  w.Bytes(std::string_view(kCheckpointMagic, 4));
  w.U32(kCheckpointVersion);
  w.U32(static_cast<std::uint32_t>(1 + ckpt.params.size() + ckpt.adam.m.size() +
                                   ckpt.adam.v.size()));

  const json meta = {
      {"config", ckpt.config},
      {"embeddings_hash", ckpt.embeddings_hash},
      {"features_hash", ckpt.features_hash},
      {"epoch", ckpt.epoch},
      {"rng_state", ckpt.rng_state},
      {"adam",
       {{"step", ckpt.adam.step},
        {"beta1", ckpt.adam.beta1},
        {"beta2", ckpt.adam.beta2},
        {"epsilon", ckpt.adam.epsilon}}}};
  const std::string meta_text = meta.dump();
  w.U8(kMetaSection);
  w.U64(meta_text.size());
  w.Bytes(meta_text);

  for (const auto& [name, t] : ckpt.params) WriteTensor(w, kParamPrefix + name, t);
  for (const auto& [name, t] : ckpt.adam.m) WriteTensor(w, kMomentPrefix + name, t);
  for (const auto& [name, t] : ckpt.adam.v) {
    WriteTensor(w, kVariancePrefix + name, t);
  }
  w.U32(Crc32(w.str()));
  return std::move(w.str());
}

Checkpoint DeserializeCheckpoint(std::string_view bytes) {
  if (bytes.size() < 16) throw IntegrityError("checkpoint truncated");
  if (bytes.substr(0, 4) != std::string_view(kCheckpointMagic, 4)) {
    throw IntegrityError("not a checkpoint (bad magic)");
  }
  const std::string_view body = bytes.substr(0, bytes.size() - 4);
  Reader trailer(bytes.substr(bytes.size() - 4));
  const std::uint32_t stored = trailer.U32();
  if (stored != Crc32(body)) {
    throw IntegrityError("checkpoint checksum mismatch (corrupt or truncated)");
  }

  Reader r(body);
  r.Bytes(4);
  const std::uint32_t version = r.U32();
  if (version != kCheckpointVersion) {
    throw IntegrityError("unsupported checkpoint version " +
                         std::to_string(version));
  }
  const std::uint32_t sections = r.U32();
  Checkpoint ckpt;
  bool have_meta = false;
  for (std::uint32_t s = 0; s < sections; ++s) {
    const std::uint8_t kind = r.U8();
    const std::string_view payload = r.Bytes(r.U64());
    if (kind == kMetaSection) {
      json meta;
      try {
        meta = json::parse(payload);
        ckpt.config = meta.at("config");
        ckpt.embeddings_hash = meta.at("embeddings_hash").get<std::string>();
        ckpt.features_hash = meta.at("features_hash").get<std::string>();
        ckpt.epoch = meta.at("epoch").get<std::uint64_t>();
        ckpt.rng_state = meta.at("rng_state").get<std::string>();
        const json& adam = meta.at("adam");
        ckpt.adam.step = adam.at("step").get<std::uint64_t>();
        ckpt.adam.beta1 = adam.at("beta1").get<double>();
        ckpt.adam.beta2 = adam.at("beta2").get<double>();
        ckpt.adam.epsilon = adam.at("epsilon").get<double>();
      } catch (const json::exception& e) {
        throw IntegrityError(std::string("checkpoint metadata: ") + e.what());
      }
      have_meta = true;
    } else if (kind == kTensorSection) {
      auto [name, tensor] = ReadTensor(payload);
      std::map<std::string, Tensor>* target = nullptr;
      std::string_view key = name;
      if (StartsWith(key, kParamPrefix)) {
        target = &ckpt.params;
        key.remove_prefix(std::strlen(kParamPrefix));
      } else if (StartsWith(key, kMomentPrefix)) {
        target = &ckpt.adam.m;
        key.remove_prefix(std::strlen(kMomentPrefix));
      } else if (StartsWith(key, kVariancePrefix)) {
        target = &ckpt.adam.v;
        key.remove_prefix(std::strlen(kVariancePrefix));
      } else {
        throw IntegrityError("unknown tensor '" + name + "'");
      }
      if (!target->emplace(std::string(key), std::move(tensor)).second) {
        throw IntegrityError("duplicate tensor '" + name + "'");
      }
    } else {
      throw IntegrityError("unknown section kind " + std::to_string(kind));
    }
  }
  if (!r.done()) throw IntegrityError("trailing bytes after last section");
  if (!have_meta) throw IntegrityError("checkpoint has no metadata section");
  return ckpt;
}

void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::string bytes = SerializeCheckpoint(ckpt);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return DeserializeCheckpoint(bytes);
}

void VerifyLexicon(const Checkpoint& ckpt, const Lexicon& lexicon) {
  if (ckpt.embeddings_hash != lexicon.embeddings_hash) {
    throw IntegrityError(
        "vocabulary/embedding hash mismatch: checkpoint was trained on " +
        ckpt.embeddings_hash + ", loaded data hashes to " +
        lexicon.embeddings_hash);
  }
  if (ckpt.features_hash != lexicon.features_hash) {
    throw IntegrityError(
        "feature table hash mismatch: checkpoint was trained on " +
        ckpt.features_hash + ", loaded data hashes to " +
        lexicon.features_hash);
  }
}

Model ModelFromCheckpoint(const Checkpoint& ckpt,
                          std::shared_ptr<const Lexicon> lexicon) {
  VerifyLexicon(ckpt, *lexicon);
  TrainConfig config;
  try {
    ckpt.config.get_to(config);
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("checkpoint config: ") + e.what());
  }
  Model model(std::move(lexicon), config.encoder, config.channels, ckpt.params);
  const ModelParams expected =
      [&] {
        std::mt19937_64 rng(0);
        return InitParams(model.encoder(), model.lexicon().features.registry(),
                          rng);
      }();
  for (const auto& [name, t] : expected) {
    const auto it = ckpt.params.find(name);
    if (it == ckpt.params.end() || it->second.shape() != t.shape()) {
      throw IntegrityError("checkpoint parameter '" + name +
                           "' missing or mis-shaped");
    }
  }
  return model;
}

Model LoadModel(const std::filesystem::path& checkpoint_path) {
  Checkpoint ckpt = LoadCheckpoint(checkpoint_path);
  TrainConfig config;
  try {
    ckpt.config.get_to(config);
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("checkpoint config: ") + e.what());
  }
  auto lexicon = std::make_shared<const Lexicon>(
      Lexicon::Load(config.embeddings, config.features));
  return ModelFromCheckpoint(ckpt, std::move(lexicon));
}

}  // namespace mcrd
