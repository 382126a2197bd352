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

#include "mcrd/service.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "mcrd/checkpoint.hpp"
#include "mcrd/errors.hpp"
#include "mcrd/evaluator.hpp"
#include "mcrd/lexicon.hpp"

namespace mcrd {
namespace {

using nlohmann::json;

template <typename T>
std::optional<T> OptionalField(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

std::string ReadAll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IntegrityError("cannot open checkpoint " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json ChannelConfigJson(const Model& model) {
  json j = json::object();
  for (Channel c : kAllChannels) {
    j[ChannelName(c)] = {
        {"active", model.is_active(c)},
        {"lambda", ChannelWeight(model.weights(), c)}};
  }
  j["beta"] = model.weights().beta;
  j["attention"] = model.encoder().attention == AttentionMode::kLiteral
                       ? "literal"
                       : "softmax";
  return j;
}

}  // namespace

QueryRequest QueryRequestFromJson(const json& j) {
  if (!j.is_object()) throw BadRequestError("request body must be an object");
  QueryRequest req;
  try {
    const auto it = j.find("description");
    if (it == j.end() || !it->is_string()) {
      throw BadRequestError("\"description\" must be a string");
    }
    req.description = it->get<std::string>();
    if (const auto k = j.find("top_k"); k != j.end() && !k->is_null()) {
      if (!k->is_number_integer()) {
        throw BadRequestError("\"top_k\" must be an integer");
      }
      const auto v = k->get<std::int64_t>();
      if (v < 1 || v > static_cast<std::int64_t>(kMaxTopK)) {
        throw BadRequestError("\"top_k\" must be in [1, 1000], got " +
                              std::to_string(v));
      }
      req.top_k = static_cast<std::size_t>(v);
    }
    req.pos = OptionalField<std::string>(j, "pos");
    req.initial_letter = OptionalField<std::string>(j, "initial_letter");
    if (const auto w = j.find("word_length"); w != j.end() && !w->is_null()) {
      if (!w->is_number_integer() || w->get<std::int64_t>() < 1) {
        throw BadRequestError("\"word_length\" must be a positive integer");
      }
      req.word_length = w->get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw BadRequestError(std::string("bad field type: ") + e.what());
  }
  return req;
}

QueryRequest ParseQueryRequest(std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw BadRequestError(std::string("malformed JSON: ") + e.what());
  }
  return QueryRequestFromJson(j);
}

json ResponseToJson(const QueryResponse& r) {
  json results = json::array();
  for (const QueryResult& q : r.results) {
    json contrib = json::object();
    for (Channel c : kAllChannels) {
      contrib[ChannelName(c)] = q.contributions[static_cast<std::size_t>(c)];
    }
    results.push_back({{"word", q.word},
                       {"score", q.score},
                       {"rank", q.rank},
                       {"contributions", std::move(contrib)}});
  }
  return {{"results", std::move(results)},
          {"model",
           {{"checkpoint_id", r.checkpoint_id}, {"channels", r.channels}}}};
}

QueryService::QueryService(std::shared_ptr<const Model> model,
                           std::string checkpoint_id)
    : model_(std::move(model)), checkpoint_id_(std::move(checkpoint_id)) {
  if (!model_) throw Error("query service needs a model");
  channels_ = ChannelConfigJson(*model_);
}

std::shared_ptr<const QueryService> QueryService::FromCheckpoint(
    const std::filesystem::path& path) {
  const std::string bytes = ReadAll(path);
  auto model = std::make_shared<const Model>(LoadModel(path));
  return std::make_shared<const QueryService>(std::move(model),
                                              Sha256Hex(bytes).substr(0, 16));
}

QueryResponse QueryService::Query(const QueryRequest& req) const {
  if (req.top_k < 1 || req.top_k > kMaxTopK) {
    throw BadRequestError("top_k must be in [1, 1000]");
  }
  const Lexicon& lex = model_->lexicon();
  PriorKnowledge pk;
  if (req.pos) {
    pk.pos = lex.features.FindPos(*req.pos);
    if (!pk.pos) throw BadRequestError("unknown POS tag \"" + *req.pos + "\"");
  }
  if (req.initial_letter) {
    try {
      pk.initial_letter = FoldInitial(*req.initial_letter);
    } catch (const ValidationError& e) {
      throw BadRequestError(e.what());
    }
  }
  pk.word_length = req.word_length;

  std::vector<std::size_t> tokens;
  try {
    tokens = Tokenize(req.description, lex.vocab);
  } catch (const EmptyQueryError& e) {
    throw BadRequestError(e.what());
  }
  const ScoredQuery scored = model_->Score(tokens);
  std::vector<std::size_t> order = Rank(scored.fused);
  if (pk.any()) {
    order.resize(std::min(order.size(), kPriorWindow));
    order = ApplyPriorFilter(order, pk, lex.features, lex.vocab);
  }
  order.resize(std::min(order.size(), req.top_k));

  QueryResponse out;
  out.checkpoint_id = checkpoint_id_;
  out.channels = channels_;
  out.results.reserve(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    const std::size_t w = order[r];
    QueryResult q;
    q.word = lex.vocab.word(w);
    q.index = w;
    q.score = scored.fused[w];
    q.rank = r;
    for (Channel c : kAllChannels) {
      const auto i = static_cast<std::size_t>(c);
      if (scored.per_word[i].empty()) continue;
      q.contributions[i] = scored.weights[i] * scored.per_word[i][w];
    }
    out.results.push_back(std::move(q));
  }
  return out;
}

json QueryService::Health() const {
  return {{"status", "ok"}, {"vocab", model_->lexicon().vocab.size()}};
}

std::pair<std::string, int> ParseBindAddress(std::string_view address) {
  const auto colon = address.rfind(':');
  if (colon == std::string_view::npos || colon + 1 == address.size()) {
    throw BadRequestError("bind address must be HOST:PORT, got \"" +
                          std::string(address) + "\"");
  }
  std::string host(address.substr(0, colon));
  if (host.empty()) host = "0.0.0.0";
  const std::string_view port_text = address.substr(colon + 1);
  int port = -1;
  const auto [ptr, ec] = std::from_chars(
      port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size() ||
      port < 0 || port > 65535) {
    throw BadRequestError("bad port \"" + std::string(port_text) + "\"");
  }
  return {std::move(host), port};
}

struct HttpServer::Impl {
  std::shared_ptr<const QueryService> service;
  httplib::Server server;
  bool bound = false;
};

namespace {

void SendJson(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void SendError(httplib::Response& res, int status, const std::string& msg) {
  SendJson(res, status, {{"error", msg}});
}

}  // namespace

HttpServer::HttpServer(std::shared_ptr<const QueryService> service)
    : impl_(std::make_unique<Impl>()) {
  impl_->service = std::move(service);
  auto svc = impl_->service;
  // Plain SO_REUSEADDR: httplib's default adds SO_REUSEPORT, which would let
  // a second server silently share a port that is already in use.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR,
               reinterpret_cast<const char*>(&yes), sizeof(yes));
  });
  impl_->server.Get("/health",
                    [svc](const httplib::Request&, httplib::Response& res) {
                      SendJson(res, 200, svc->Health());
                    });
  impl_->server.Post(
      "/query", [svc](const httplib::Request& req, httplib::Response& res) {
        try {
          const QueryRequest q = ParseQueryRequest(req.body);
          SendJson(res, 200, ResponseToJson(svc->Query(q)));
        } catch (const BadRequestError& e) {
          SendError(res, 400, e.what());
        } catch (const std::exception& e) {
          spdlog::error("query failed: {}", e.what());
          SendError(res, 500, e.what());
        }
      });
}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Bind(const std::string& host, int port) {
  int bound = -1;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    bound = port;
  }
  if (bound <= 0) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->bound = true;
  return bound;
}

void HttpServer::Serve() {
  if (!impl_->bound) throw Error("Serve() before Bind()");
  impl_->server.listen_after_bind();
}

void HttpServer::Stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

}  // namespace mcrd
