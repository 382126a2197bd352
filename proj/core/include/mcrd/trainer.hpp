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
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcrd/checkpoint.hpp"
#include "mcrd/config.hpp"
#include "mcrd/errors.hpp"
#include "mcrd/graph.hpp"
#include "mcrd/lexicon.hpp"
#include "mcrd/model.hpp"
#include "mcrd/optimizer.hpp"

namespace mcrd {

/// Mean per-example loss over the batch on the fused scores. Dropout is
/// active only when `dropout_rng` is non-null.
ad::NodeId BatchLoss(ad::Graph& g, const Binding& binding, const Model& model,
                     const QueryBatch& batch, LossMode mode,
                     std::mt19937_64* dropout_rng);

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  double acc1 = 0.0;
  double acc10 = 0.0;
  double seconds = 0.0;
};

nlohmann::json EpochLogToJson(const EpochLog& log);

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> log;
};

/// Raised when the loss or a gradient turns non-finite. Carries the state as
/// of the last completed epoch.
class TrainingDiverged : public DivergenceError {
 public:
  TrainingDiverged(const std::string& what, Checkpoint last_good)
      : DivergenceError(what), last_good_(std::move(last_good)) {}
  const Checkpoint& last_good() const { return last_good_; }

 private:
  Checkpoint last_good_;
};

struct TrainInputs {
  std::shared_ptr<const Lexicon> lexicon;
  const DefinitionDataset* train = nullptr;
  /// Split used for the per-epoch acc@1/10; defaults to the first 500
  /// training entries when null.
  const DefinitionDataset* seen = nullptr;
  /// Continue from this state; its lexicon hashes must match.
  const Checkpoint* resume = nullptr;
  std::function<void(const EpochLog&)> on_epoch;
};

/// Runs `config.epochs` epochs of Adam over shuffled batches. Deterministic
/// for a given seed: identical inputs give a bit-identical checkpoint.
TrainResult Train(const TrainConfig& config, const TrainInputs& inputs);

/// Runs the full pipeline from a config file: loads data, trains, writes the
/// checkpoint and the JSON-lines log.
TrainResult TrainFromConfig(const TrainConfig& config,
                            const std::filesystem::path* resume = nullptr);

}  // namespace mcrd
