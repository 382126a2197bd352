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

#include "mcrd/config.hpp"

#include <fstream>

#include "mcrd/errors.hpp"

namespace mcrd {

using nlohmann::json;

void EncoderConfig::Validate() const {
  if (input_dim < 1 || hidden < 1) {
    throw ValidationError("encoder dimensions must be >= 1");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ValidationError("dropout must lie in [0, 1)");
  }
}

void ChannelWeights::Validate() const {
  for (double w : {word, pos, mor, cat, sem}) {
    if (!(w >= 0.0)) throw ValidationError("channel weights must be >= 0");
  }
  if (word == 0 && pos == 0 && mor == 0 && cat == 0 && sem == 0) {
    throw ValidationError("at least one channel weight must be positive");
  }
}

void TrainConfig::Validate() const {
  if (!(learning_rate > 0)) throw ValidationError("learning_rate must be > 0");
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (clip_norm < 0) throw ValidationError("clip_norm must be >= 0");
  encoder.Validate();
  channels.Validate();
}

const char* AttentionModeName(AttentionMode mode) {
  return mode == AttentionMode::kLiteral ? "literal" : "softmax";
}

AttentionMode ParseAttentionMode(const std::string& name) {
  if (name == "literal") return AttentionMode::kLiteral;
  if (name == "softmax") return AttentionMode::kSoftmax;
  throw ValidationError("unknown attention mode '" + name + "'");
}

const char* LossModeName(LossMode mode) {
  return mode == LossMode::kSoftmax ? "softmax" : "one-vs-all-sigmoid";
}

LossMode ParseLossMode(const std::string& name) {
  if (name == "softmax") return LossMode::kSoftmax;
  if (name == "one-vs-all-sigmoid" || name == "one-vs-all") {
    return LossMode::kOneVsAllSigmoid;
  }
  throw ValidationError("unknown loss mode '" + name + "'");
}

void to_json(json& j, const EncoderConfig& c) {
  j = json{{"input_dim", c.input_dim},
           {"hidden", c.hidden},
           {"attention", AttentionModeName(c.attention)},
           {"dropout", c.dropout}};
}

void from_json(const json& j, EncoderConfig& c) {
  c.input_dim = j.value("input_dim", c.input_dim);
  c.hidden = j.value("hidden", c.hidden);
  if (j.contains("attention")) {
    c.attention = ParseAttentionMode(j.at("attention").get<std::string>());
  }
  c.dropout = j.value("dropout", c.dropout);
}

void to_json(json& j, const ChannelWeights& c) {
  j = json{{"lambda_word", c.word}, {"lambda_pos", c.pos},
           {"lambda_mor", c.mor},   {"lambda_cat", c.cat},
           {"lambda_sem", c.sem},   {"beta", c.beta}};
}

void from_json(const json& j, ChannelWeights& c) {
  c.word = j.value("lambda_word", c.word);
  c.pos = j.value("lambda_pos", c.pos);
  c.mor = j.value("lambda_mor", c.mor);
  c.cat = j.value("lambda_cat", c.cat);
  c.sem = j.value("lambda_sem", c.sem);
  c.beta = j.value("beta", c.beta);
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"embeddings", c.embeddings.generic_string()},
           {"features", c.features.generic_string()},
           {"train", c.train.generic_string()},
           {"seen", c.seen.generic_string()},
           {"checkpoint", c.checkpoint.generic_string()},
           {"log", c.log.generic_string()},
           {"learning_rate", c.learning_rate},
           {"batch_size", c.batch_size},
           {"epochs", c.epochs},
           {"seed", c.seed},
           {"loss", LossModeName(c.loss)},
           {"clip_norm", c.clip_norm},
           {"encoder", c.encoder},
           {"channels", c.channels}};
}

void from_json(const json& j, TrainConfig& c) {
  auto path = [&](const char* key, std::filesystem::path& out) {
    if (j.contains(key) && j.at(key).is_string()) {
      out = j.at(key).get<std::string>();
    }
  };
  path("embeddings", c.embeddings);
  path("features", c.features);
  path("train", c.train);
  path("seen", c.seen);
  path("checkpoint", c.checkpoint);
  path("log", c.log);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.seed = j.value("seed", c.seed);
  if (j.contains("loss")) c.loss = ParseLossMode(j.at("loss").get<std::string>());
  c.clip_norm = j.value("clip_norm", c.clip_norm);
  if (j.contains("encoder")) j.at("encoder").get_to(c.encoder);
  if (j.contains("channels")) j.at("channels").get_to(c.channels);
}

TrainConfig LoadTrainConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  TrainConfig config;
  try {
    j.get_to(config);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  const auto base = path.parent_path();
  for (auto* p : {&config.embeddings, &config.features, &config.train,
                  &config.seen, &config.checkpoint, &config.log}) {
    if (!p->empty() && p->is_relative()) {
      *p = std::filesystem::absolute(base / *p).lexically_normal();
    }
  }
  config.Validate();
  return config;
}

}  // namespace mcrd
