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

// mcrd: train, evaluate, query and serve the multi-channel reverse
// dictionary.

#include <csignal>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "mcrd/checkpoint.hpp"
#include "mcrd/config.hpp"
#include "mcrd/errors.hpp"
#include "mcrd/evaluator.hpp"
#include "mcrd/logging.hpp"
#include "mcrd/service.hpp"
#include "mcrd/synthetic.hpp"
#include "mcrd/trainer.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kUsageError = 2;

mcrd::HttpServer* g_server = nullptr;

void HandleSignal(int) {
  if (g_server != nullptr) g_server->Stop();
}

int RunTrain(const fs::path& config_path, std::optional<std::uint64_t> seed,
             const std::string& resume) {
  mcrd::TrainConfig config = mcrd::LoadTrainConfig(config_path);
  if (seed) config.seed = *seed;
  const fs::path resume_path(resume);
  const auto result =
      mcrd::TrainFromConfig(config, resume.empty() ? nullptr : &resume_path);
  std::printf("wrote %s (epoch %llu) and %s\n", config.checkpoint.c_str(),
              static_cast<unsigned long long>(result.checkpoint.epoch),
              config.log.c_str());
  return 0;
}

int RunEval(const fs::path& checkpoint, const fs::path& testset,
            const std::string& prior, bool as_json) {
  const mcrd::PriorField field = mcrd::ParsePriorField(prior);
  const mcrd::Model model = mcrd::LoadModel(checkpoint);
  const mcrd::DefinitionDataset data =
      mcrd::LoadDataset(testset, model.lexicon().vocab, mcrd::Split::kSeen);
  const mcrd::EvalReport report = mcrd::Evaluate(model, data, field);
  if (as_json) {
    nlohmann::json j = mcrd::ReportToJson(report);
    j["testset"] = testset.string();
    j["prior"] = mcrd::PriorFieldName(field);
    std::cout << j.dump(2) << '\n';
  } else {
    std::string label = testset.stem().string();
    if (field != mcrd::PriorField::kNone) {
      label += std::string(" [") + mcrd::PriorFieldName(field) + "]";
    }
    std::cout << mcrd::FormatReportTable(report, label);
  }
  return 0;
}

int RunQuery(const fs::path& checkpoint, const mcrd::QueryRequest& request,
             bool as_json) {
  const auto service = mcrd::QueryService::FromCheckpoint(checkpoint);
  const mcrd::QueryResponse response = service->Query(request);
  if (as_json) {
    std::cout << mcrd::ResponseToJson(response).dump(2) << '\n';
    return 0;
  }
  if (response.results.empty()) {
    std::cout << "no words match the given filters\n";
    return 0;
  }
  for (const mcrd::QueryResult& r : response.results) {
    std::printf("%4zu  %-24s %10.4f  ", r.rank, r.word.c_str(), r.score);
    for (mcrd::Channel c : mcrd::kAllChannels) {
      std::printf(" %s=%.3f", mcrd::ChannelName(c),
                  r.contributions[static_cast<std::size_t>(c)]);
    }
    std::printf("\n");
  }
  return 0;
}

int RunServe(const fs::path& checkpoint, const std::string& bind) {
  const auto [host, port] = mcrd::ParseBindAddress(bind);
  const auto service = mcrd::QueryService::FromCheckpoint(checkpoint);
  mcrd::HttpServer server(service);
  const int bound = server.Bind(host, port);
  g_server = &server;
  std::signal(SIGINT, HandleSignal);
  std::signal(SIGTERM, HandleSignal);
  spdlog::info("serving {} words on {}:{} (checkpoint {})",
               service->model().lexicon().vocab.size(), host, bound,
               service->checkpoint_id());
  std::printf("listening on %s:%d\n", host.c_str(), bound);
  std::fflush(stdout);
  server.Serve();
  g_server = nullptr;
  return 0;
}

// Writes a synthetic corpus and a config that trains on it.
int RunMakeToy(const fs::path& out, const mcrd::SyntheticOptions& options,
               std::size_t epochs) {
  fs::create_directories(out);
  mcrd::WriteCorpus(mcrd::GenerateCorpus(options), out);
  mcrd::TrainConfig config;
  config.embeddings = "embeddings.txt";
  config.features = "features.jsonl";
  config.train = "train.tsv";
  config.seen = "train.tsv";
  config.checkpoint = "toy.mcrd";
  config.log = "train_log.jsonl";
  config.epochs = epochs;
  config.seed = options.seed;
  config.encoder.input_dim = options.dim;
  config.encoder.hidden = options.dim;
  std::ofstream(out / "config.json") << nlohmann::json(config).dump(2) << '\n';
  std::printf("wrote toy corpus and config.json to %s\n", out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  mcrd::InitLogging();
  CLI::App app{"Multi-channel reverse dictionary", "mcrd"};
  app.require_subcommand(1);

  fs::path config_path, checkpoint, testset, out_dir;
  std::string resume, prior = "none", bind = "127.0.0.1:8080";
  std::optional<std::uint64_t> seed;
  bool as_json = false;
  mcrd::QueryRequest request;
  mcrd::SyntheticOptions toy;
  toy.embedding_norm = 2.0;
  std::size_t toy_epochs = 50;

  auto* train = app.add_subcommand("train", "Train a model from a JSON config");
  train->add_option("--config", config_path, "Training config")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--seed", seed, "Override the config seed");
  train->add_option("--resume", resume, "Continue from this checkpoint")
      ->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("eval", "Rank a test set and report metrics");
  eval->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  eval->add_option("--testset", testset)->required()->check(CLI::ExistingFile);
  eval->add_option("--prior", prior, "none | pos | initial-letter | word-length")
      ->check(CLI::IsMember({"none", "pos", "initial-letter", "word-length"}));
  eval->add_flag("--json", as_json, "Print a JSON report");

  auto* query = app.add_subcommand("query", "Rank words for one description");
  query->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  query->add_option("description", request.description)->required();
  query->add_option("--top-k", request.top_k)
      ->check(CLI::Range(std::size_t{1}, mcrd::kMaxTopK));
  query->add_option("--pos", request.pos, "POS tag name");
  query->add_option("--initial-letter", request.initial_letter);
  query->add_option("--word-length", request.word_length);
  query->add_flag("--json", as_json, "Print the JSON response");

  auto* serve = app.add_subcommand("serve", "HTTP service: POST /query, GET /health");
  serve->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  serve->add_option("--bind", bind, "HOST:PORT")->capture_default_str();

  auto* make_toy = app.add_subcommand("make-toy", "Write a synthetic corpus and config");
  make_toy->add_option("--out", out_dir)->required();
  make_toy->add_option("--seed", toy.seed)->capture_default_str();
  make_toy->add_option("--words", toy.words)->capture_default_str();
  make_toy->add_option("--heldout", toy.heldout_words)->capture_default_str();
  make_toy->add_option("--dim", toy.dim)->capture_default_str();
  make_toy->add_option("--pos-tags", toy.pos_tags)->capture_default_str();
  make_toy->add_option("--cues", toy.cues_per_feature, "Cue words per feature")
      ->capture_default_str();
  make_toy->add_option("--fillers", toy.fillers_per_definition,
                       "Filler words per definition")
      ->capture_default_str();
  make_toy->add_option("--epochs", toy_epochs)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* failed = &app;
    for (const CLI::App* sub : app.get_subcommands()) failed = sub;
    std::cerr << failed->help(failed == &app ? "" : "mcrd");
    return kUsageError;
  }

  try {
    if (*train) return RunTrain(config_path, seed, resume);
    if (*eval) return RunEval(checkpoint, testset, prior, as_json);
    if (*query) return RunQuery(checkpoint, request, as_json);
    if (*serve) return RunServe(checkpoint, bind);
    if (*make_toy) return RunMakeToy(out_dir, toy, toy_epochs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kUsageError;
}
