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

#ifndef SURGEON_TRAINER_H_
#define SURGEON_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "surgeon/augmenter.h"
#include "surgeon/dataio.h"
#include "surgeon/encoder.h"
#include "surgeon/objective.h"
#include "surgeon/optimizer.h"

namespace surgeon {

// kPre augments the features and encodes both views; kPost encodes once and
// augments the encoder output.
enum class AugmentMode { kPre, kPost };
enum class BatchMode { kFull, kNeighbor };
// Which augmentation output stands in for a single view at inference.
enum class EmbedHead { kHead1, kHead2, kMean };
enum class Precision { kFloat32, kFloat64 };

std::string_view AugmentModeName(AugmentMode m);
std::optional<AugmentMode> ParseAugmentMode(std::string_view s);
std::string_view EmbedHeadName(EmbedHead h);
std::optional<EmbedHead> ParseEmbedHead(std::string_view s);

struct TrainConfig {
  AugmentMode mode = AugmentMode::kPre;
  int epochs = 500;
  AdamConfig adam;
  BatchMode batch = BatchMode::kFull;
  // Per encoder layer, input side first. kAllNeighbors keeps every neighbor.
  std::vector<std::size_t> fanouts;
  std::size_t batch_size = 1024;
  // D: augmentation width (pre) or encoder output width (post).
  std::size_t aug_dim = 128;
  // F_L: final representation width compared by the loss.
  std::size_t embed_dim = 128;
  // Encoder hidden width; 0 means "same as the encoder output".
  std::size_t hidden_dim = 0;
  std::size_t encoder_layers = 2;
  LossConfig loss;
  double aug_dropout = 0.2;
  double encoder_dropout = 0.2;
  bool residual = true;
  bool aug_bias = true;
  bool encoder_bias = true;
  EmbedHead embed_head = EmbedHead::kMean;
  std::uint64_t seed = 0;
  Precision precision = Precision::kFloat32;

  // Throws InvalidArgument for inconsistent settings.
  void Validate(std::size_t num_features) const;
  // Encoder widths {F_0, ..., F_L} for a dataset with `num_features`.
  std::vector<std::size_t> EncoderDims(std::size_t num_features) const;
  std::size_t AugmenterInDim(std::size_t num_features) const;
  std::size_t AugmenterOutDim() const;
};

template <typename T>
struct Model {
  AugmentMode mode = AugmentMode::kPre;
  AugmenterParams<T> augmenter;
  EncoderParams<T> encoder;

  std::size_t input_dim() const {
    return mode == AugmentMode::kPre ? augmenter.in_dim() : encoder.in_dim();
  }
  std::size_t output_dim() const {
    return mode == AugmentMode::kPre ? encoder.out_dim() : augmenter.out_dim();
  }
  std::size_t ParameterCount() const;
};

// Parameters in declaration order: W1, b1, W2, b2, then W_l, b_l per
// encoder layer (biases only when enabled). Checkpoints and the optimizer
// both use this order.
template <typename T>
std::vector<Matrix<T>*> Parameters(Model<T>& model);
template <typename T>
std::vector<const Matrix<T>*> Parameters(const Model<T>& model);

template <typename T>
Model<T> InitModel(const TrainConfig& config, std::size_t num_features);

struct StepStats {
  double loss = 0.0;
  double invariance = 0.0;
  double constraint1 = 0.0;
  double constraint2 = 0.0;
  std::size_t encoder_forwards = 0;
  // Gram, identity-difference and norm buffers of the constraint terms.
  std::size_t constraint_bytes = 0;
};

// One joint update in pre mode: two augmented views, each encoded by the
// shared encoder (independent dropout), then one Adam step over every
// parameter. Shapes are checked before any parameter changes; a non-finite
// loss throws NumericalError and leaves the model untouched.
template <typename T>
StepStats TrainStepPre(std::span<const LayerOperator<T>> layers,
                       const Matrix<T>& features, Model<T>& model,
                       Adam<T>& optimizer, const TrainConfig& config, Rng& rng);

// One joint update in post mode: a single encoder pass, then both heads.
template <typename T>
StepStats TrainStepPost(std::span<const LayerOperator<T>> layers,
                        const Matrix<T>& features, Model<T>& model,
                        Adam<T>& optimizer, const TrainConfig& config, Rng& rng);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double loss = 0.0;
  double invariance = 0.0;
  double constraint1 = 0.0;
  double constraint2 = 0.0;
  double ms = 0.0;
  std::int64_t peak_bytes = 0;
  std::size_t encoder_forwards = 0;
  std::size_t constraint_bytes = 0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;

  // epoch,loss,invariance,constraint1,constraint2,ms,peak_bytes
  std::string ToCsv() const;
  void WriteCsv(const std::string& path) const;
};

// Owns one training run: parameters, optimizer state and RNG streams.
template <typename T>
class Trainer {
 public:
  Trainer(const Graph& graph, const Matrix<float>& features, TrainConfig config);

  // Runs one epoch (one step in full-batch mode, one step per shuffled
  // batch in neighbor mode) and returns its averaged record.
  EpochRecord RunEpoch();

  const Model<T>& model() const { return model_; }
  Model<T>& mutable_model() { return model_; }
  const TrainConfig& config() const { return config_; }
  int epochs_run() const { return epoch_; }

 private:
  StepStats Step(std::span<const LayerOperator<T>> layers, const Matrix<T>& x);

  const Graph& graph_;
  TrainConfig config_;
  Matrix<T> features_;
  std::vector<LayerOperator<T>> full_ops_;
  Model<T> model_;
  Adam<T> optimizer_;
  Rng dropout_rng_;
  Rng sample_rng_;
  int epoch_ = 0;
};

template <typename T>
struct FitResult {
  Model<T> model;
  TrainHistory history;
};

// Called after every epoch with the 1-based epoch number.
template <typename T>
using EpochCallback = std::function<void(const EpochRecord&, const Model<T>&)>;

// Runs config.epochs epochs. Non-finite losses abort with NumericalError
// naming the epoch and the offending term.
template <typename T>
FitResult<T> Fit(const DatasetBundle& dataset, const TrainConfig& config,
                 const EpochCallback<T>& on_epoch = {});

// Eval-mode node embeddings. Pre: the encoder applied to the selected
// augmentation of the raw features. Post: the selected augmentation head
// applied to the encoder output. Not unit-normalized.
template <typename T>
Matrix<T> Embed(const Graph& graph, const Matrix<float>& features,
                const Model<T>& model, EmbedHead head);

// Same, but checks that `config.mode` matches the model.
template <typename T>
Matrix<T> Embed(const DatasetBundle& dataset, const Model<T>& model,
                const TrainConfig& config);

// "GSRG", u32 version, u32 mode (0 pre, 1 post), u32 flags (bit 0 augmenter
// bias, bit 1 encoder bias, bit 2 residual), f32 augmenter dropout, f32
// encoder dropout, u32 tensor count, per-tensor (u64 rows, u64 cols), then
// every tensor as LE f32 in Parameters() order.
template <typename T>
void SaveCheckpoint(const std::string& path, const Model<T>& model);
template <typename T>
Model<T> LoadCheckpoint(const std::string& path);

}  // namespace surgeon

#endif  // SURGEON_TRAINER_H_
