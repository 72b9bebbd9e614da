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

#include "surgeon/protocol.h"

#include <fmt/format.h>

#include "surgeon/error.h"

namespace surgeon {

template <typename T>
Metrics ProbeModelOnSplit(const DatasetBundle& data, const Model<T>& model,
                          EmbedHead head, const ProbeConfig& probe,
                          std::span<const NodeIndex> split) {
  const Matrix<double> z = Embed(data.graph, data.features, model, head).template Cast<double>();
  const ProbeModel fitted = FitProbe(z, data.labels, data.splits.train, probe);
  return Evaluate(fitted, z, data.labels, split);
}

template <typename T>
SelectionResult<T> TrainWithSelection(const DatasetBundle& data,
                                      const TrainConfig& config,
                                      const ProbeConfig& probe, int every,
                                      const CheckpointCallback<T>& on_checkpoint) {
  if (every < 1) {
    throw InvalidArgument(fmt::format("checkpoint interval must be >= 1, got {}", every));
  }
  SelectionResult<T> result;
  auto on_epoch = [&](const EpochRecord& rec, const Model<T>& model) {
    if (rec.epoch % every != 0 && rec.epoch != config.epochs) return;
    if (on_checkpoint) on_checkpoint(rec.epoch, model);
    CheckpointScore score{
        rec.epoch,
        ProbeModelOnSplit(data, model, config.embed_head, probe, data.splits.val),
        ProbeModelOnSplit(data, model, config.embed_head, probe, data.splits.test)};
    result.scores.push_back(std::move(score));
    if (result.scores.size() == 1 ||
        result.scores.back().val.value > result.scores[result.best].val.value) {
      result.best = result.scores.size() - 1;
      result.best_model = model;
    }
  };
  result.fit = Fit<T>(data, config, on_epoch);
  return result;
}

#define SURGEON_INSTANTIATE_PROTOCOL(T)                                          \
  template Metrics ProbeModelOnSplit<T>(const DatasetBundle&, const Model<T>&,   \
                                        EmbedHead, const ProbeConfig&,           \
                                        std::span<const NodeIndex>);             \
  template SelectionResult<T> TrainWithSelection<T>(                             \
      const DatasetBundle&, const TrainConfig&, const ProbeConfig&, int,         \
      const CheckpointCallback<T>&);

SURGEON_INSTANTIATE_PROTOCOL(float)
SURGEON_INSTANTIATE_PROTOCOL(double)

}  // namespace surgeon
