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

#include "mcrd/trainer.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mcrd/evaluator.hpp"
#include "mcrd/ops.hpp"

namespace mcrd {

ad::NodeId BatchLoss(ad::Graph& g, const Binding& binding, const Model& model,
                     const QueryBatch& batch, LossMode mode,
                     std::mt19937_64* dropout_rng) {
  if (batch.size() == 0) throw EmptyInputError("empty batch");
  std::vector<ad::NodeId> losses;
  losses.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const QueryForward fwd =
        model.Forward(g, binding, batch.Row(i), batch.MaskRow(i), dropout_rng);
    losses.push_back(mode == LossMode::kSoftmax
                         ? ad::SoftmaxCrossEntropy(g, fwd.fused, batch.targets[i])
                         : ad::SigmoidCrossEntropy(g, fwd.fused, batch.targets[i]));
  }
  const std::vector<double> mean(losses.size(),
                                 1.0 / static_cast<double>(losses.size()));
  return ad::LinearCombination(g, losses, mean);
}

nlohmann::json EpochLogToJson(const EpochLog& log) {
  return {{"epoch", log.epoch},
          {"loss", log.loss},
          {"acc1", log.acc1},
          {"acc10", log.acc10},
          {"seconds", log.seconds}};
}

namespace {

std::string RngState(const std::mt19937_64& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

void RestoreRng(std::mt19937_64& rng, const std::string& state) {
  std::istringstream in(state);
  in >> rng;
  if (!in) throw IntegrityError("checkpoint RNG state is unreadable");
}

Checkpoint Snapshot(const TrainConfig& config, const Model& model,
                    const AdamState& adam, std::size_t epoch,
                    const std::mt19937_64& rng) {
  Checkpoint c;
  c.config = config;
  c.params = model.params();
  c.adam = adam;
  c.embeddings_hash = model.lexicon().embeddings_hash;
  c.features_hash = model.lexicon().features_hash;
  c.epoch = epoch;
  c.rng_state = RngState(rng);
  return c;
}

}  // namespace

TrainResult Train(const TrainConfig& config, const TrainInputs& inputs) {
  config.Validate();
  if (inputs.train == nullptr || inputs.train->empty()) {
    throw EmptyInputError("training dataset is empty");
  }
  const Lexicon& lex = *inputs.lexicon;
  TrainConfig effective = config;
  effective.encoder.input_dim = lex.embeddings.dim();

  std::mt19937_64 rng(config.seed);
  std::optional<Model> model;
  AdamState adam;
  std::size_t start_epoch = 0;
  if (inputs.resume != nullptr) {
    model.emplace(ModelFromCheckpoint(*inputs.resume, inputs.lexicon));
    adam = inputs.resume->adam;
    start_epoch = inputs.resume->epoch;
    RestoreRng(rng, inputs.resume->rng_state);
  } else {
    model.emplace(Model::Initialize(inputs.lexicon, effective.encoder,
                                    effective.channels, rng));
    adam = MakeAdamState(model->params());
  }

  DefinitionDataset seen_fallback;
  const DefinitionDataset* seen = inputs.seen;
  if (seen == nullptr || seen->empty()) {
    seen_fallback.split = Split::kSeen;
    const std::size_t n = std::min<std::size_t>(500, inputs.train->size());
    seen_fallback.entries.assign(inputs.train->entries.begin(),
                                 inputs.train->entries.begin() + n);
    seen = &seen_fallback;
  }

  TrainResult result;
  Checkpoint last_good = Snapshot(effective, *model, adam, start_epoch, rng);
  const bool dropout = config.encoder.dropout > 0.0;
  for (std::size_t epoch = start_epoch + 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const std::uint64_t shuffle_seed = rng();
    const auto batches = MakeBatches(*inputs.train, config.batch_size,
                                     shuffle_seed, lex.vocab.pad_index());
    double loss_sum = 0.0;
    for (const QueryBatch& batch : batches) {
      ad::Graph g;
      const Binding binding = Bind(g, model->params(), true);
      const ad::NodeId loss = BatchLoss(g, binding, *model, batch, config.loss,
                                        dropout ? &rng : nullptr);
      const double value = g.value(loss).item();
      if (!std::isfinite(value)) {
        throw TrainingDiverged("loss became non-finite in epoch " +
                                   std::to_string(epoch),
                               last_good);
      }
      g.Backward(loss);
      Gradients grads = g.ParameterGradients();
      if (config.clip_norm > 0) ClipGradients(grads, config.clip_norm);
      try {
        AdamStep(model->mutable_params(), grads, adam, config.learning_rate);
      } catch (const DivergenceError& e) {
        throw TrainingDiverged(e.what(), last_good);
      }
      loss_sum += value * static_cast<double>(batch.size());
    }

    const EvalReport report = Evaluate(*model, *seen);
    EpochLog entry;
    entry.epoch = epoch;
    entry.loss = loss_sum / static_cast<double>(inputs.train->size());
    entry.acc1 = report.acc1;
    entry.acc10 = report.acc10;
    entry.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - started)
                        .count();
    result.log.push_back(entry);
    if (inputs.on_epoch) inputs.on_epoch(entry);
    last_good = Snapshot(effective, *model, adam, epoch, rng);
  }
  result.checkpoint = std::move(last_good);
  return result;
}

TrainResult TrainFromConfig(const TrainConfig& config,
                            const std::filesystem::path* resume) {
  auto lexicon = std::make_shared<const Lexicon>(
      Lexicon::Load(config.embeddings, config.features));
  spdlog::info("vocabulary: {} words, d = {}", lexicon->vocab.size(),
               lexicon->embeddings.dim());
  const DefinitionDataset train =
      LoadDataset(config.train, lexicon->vocab, Split::kTrain);
  DefinitionDataset seen;
  if (!config.seen.empty()) {
    seen = LoadDataset(config.seen, lexicon->vocab, Split::kSeen);
  }
  spdlog::info("training pairs: {} ({} rejected)", train.size(), train.rejected);

  std::optional<Checkpoint> resumed;
  if (resume != nullptr) {
    resumed = LoadCheckpoint(*resume);
    VerifyLexicon(*resumed, *lexicon);
  }

  if (config.log.has_parent_path()) {
    std::filesystem::create_directories(config.log.parent_path());
  }
  std::ofstream log_out(config.log, resume ? std::ios::app : std::ios::trunc);
  if (!log_out) throw Error("cannot write log " + config.log.string());

  TrainInputs inputs;
  inputs.lexicon = lexicon;
  inputs.train = &train;
  inputs.seen = config.seen.empty() ? nullptr : &seen;
  inputs.resume = resumed ? &*resumed : nullptr;
  inputs.on_epoch = [&](const EpochLog& e) {
    log_out << EpochLogToJson(e).dump() << '\n';
    log_out.flush();
    spdlog::info("epoch {:>4}  loss {:.6f}  acc@1 {:.3f}  acc@10 {:.3f}  ({:.2f}s)",
                 e.epoch, e.loss, e.acc1, e.acc10, e.seconds);
  };
  try {
    TrainResult result = Train(config, inputs);
    SaveCheckpoint(result.checkpoint, config.checkpoint);
    return result;
  } catch (const TrainingDiverged& e) {
    const auto partial =
        std::filesystem::path(config.checkpoint.string() + ".partial");
    SaveCheckpoint(e.last_good(), partial);
    spdlog::error("{}; last good state saved to {}", e.what(), partial.string());
    throw;
  }
}

}  // namespace mcrd
