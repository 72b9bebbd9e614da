// Copyright 2026 The Surgeon Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SURGEON_PROTOCOL_H_
#define SURGEON_PROTOCOL_H_

#include <functional>
#include <vector>

#include "surgeon/dataio.h"
#include "surgeon/probe.h"
#include "surgeon/trainer.h"

namespace surgeon {

// Embeds with `model`, fits a probe on the train split and scores `split`.
template <typename T>
Metrics ProbeModelOnSplit(const DatasetBundle& data, const Model<T>& model,
                          EmbedHead head, const ProbeConfig& probe,
                          std::span<const NodeIndex> split);

struct CheckpointScore {
  int epoch = 0;
  Metrics val;
  Metrics test;
};

template <typename T>
struct SelectionResult {
  FitResult<T> fit;  // final parameters and full history
  std::vector<CheckpointScore> scores;
  std::size_t best = 0;  // index into scores
  Model<T> best_model;

  const CheckpointScore& chosen() const { return scores[best]; }
};

// Called with each checkpointed model before it is scored.
template <typename T>
using CheckpointCallback = std::function<void(int epoch, const Model<T>&)>;

// Trains for config.epochs, probe-scoring the model every `every` epochs and
// after the last one. The checkpoint with the highest validation score is
// kept (earliest on ties); test scores are recorded but never used to choose.
template <typename T>
SelectionResult<T> TrainWithSelection(const DatasetBundle& data,
                                      const TrainConfig& config,
                                      const ProbeConfig& probe, int every,
                                      const CheckpointCallback<T>& on_checkpoint = {});

}  // namespace surgeon

#endif  // SURGEON_PROTOCOL_H_
