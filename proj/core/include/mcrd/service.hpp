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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcrd/channels.hpp"
#include "mcrd/errors.hpp"
#include "mcrd/model.hpp"

namespace mcrd {

inline constexpr std::size_t kDefaultTopK = 10;
inline constexpr std::size_t kMaxTopK = 1000;

struct QueryRequest {
  std::string description;
  std::size_t top_k = kDefaultTopK;
  std::optional<std::string> pos;  // tag name from the POS registry
  std::optional<std::string> initial_letter;
  std::optional<std::size_t> word_length;
};

/// Thrown for requests the caller can fix (maps to HTTP 400).
class BadRequestError : public Error {
 public:
  using Error::Error;
};

/// Parses a POST /query body. Throws BadRequestError with a diagnostic for
/// malformed JSON, wrong field types or an out-of-range top_k.
QueryRequest ParseQueryRequest(std::string_view body);
QueryRequest QueryRequestFromJson(const nlohmann::json& j);

struct QueryResult {
  std::string word;
  std::size_t index = 0;
  double score = 0.0;
  std::size_t rank = 0;
  /// lambda_c * sc_{w,c} per channel, in fusion order; 0 for inactive ones.
  std::array<double, kChannelCount> contributions{};
};

struct QueryResponse {
  std::vector<QueryResult> results;
  std::string checkpoint_id;
  nlohmann::json channels;
};

nlohmann::json ResponseToJson(const QueryResponse& response);

/// Answers queries against one immutable model. All methods are const and
/// safe to call concurrently.
class QueryService {
 public:
  QueryService(std::shared_ptr<const Model> model, std::string checkpoint_id);

  /// Loads and verifies a checkpoint; the id is a prefix of its SHA-256.
  static std::shared_ptr<const QueryService> FromCheckpoint(
      const std::filesystem::path& path);

  QueryResponse Query(const QueryRequest& request) const;

  /// {"status":"ok","vocab":N}
  nlohmann::json Health() const;

  const Model& model() const { return *model_; }
  const std::string& checkpoint_id() const { return checkpoint_id_; }
  const nlohmann::json& channel_config() const { return channels_; }

 private:
  std::shared_ptr<const Model> model_;
  std::string checkpoint_id_;
  nlohmann::json channels_;
};

/// POST /query and GET /health over a QueryService.
class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<const QueryService> service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds without serving yet. Port 0 picks a free port. Returns the bound
  /// port; throws Error when the address cannot be bound.
  int Bind(const std::string& host, int port);
  /// Blocks until Stop().
  void Serve();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Splits "HOST:PORT". Throws BadRequestError on a malformed address.
std::pair<std::string, int> ParseBindAddress(std::string_view address);

}  // namespace mcrd
