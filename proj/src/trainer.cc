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

#include "surgeon/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "surgeon/error.h"
#include "surgeon/fileio.h"
#include "surgeon/memory.h"

namespace surgeon {

std::string_view AugmentModeName(AugmentMode m) {
  return m == AugmentMode::kPre ? "pre" : "post";
}

std::optional<AugmentMode> ParseAugmentMode(std::string_view s) {
  if (s == "pre") return AugmentMode::kPre;
  if (s == "post") return AugmentMode::kPost;
  return std::nullopt;
}

std::string_view EmbedHeadName(EmbedHead h) {
  switch (h) {
    case EmbedHead::kHead1:
      return "head1";
    case EmbedHead::kHead2:
      return "head2";
    case EmbedHead::kMean:
      return "mean";
  }
  return "?";
}

std::optional<EmbedHead> ParseEmbedHead(std::string_view s) {
  if (s == "head1") return EmbedHead::kHead1;
  if (s == "head2") return EmbedHead::kHead2;
  if (s == "mean") return EmbedHead::kMean;
  return std::nullopt;
}

void TrainConfig::Validate(std::size_t num_features) const {
  auto fail = [](const std::string& msg) { throw InvalidArgument("train config: " + msg); };
  if (epochs < 1) fail("epochs must be >= 1, got " + std::to_string(epochs));
  if (num_features == 0) fail("dataset has no features");
  if (aug_dim == 0 || embed_dim == 0) fail("aug_dim and embed_dim must be positive");
  if (encoder_layers == 0) fail("encoder_layers must be >= 1");
  if (!(adam.lr > 0.0) || !std::isfinite(adam.lr)) fail("lr must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    fail("adam betas must lie in [0, 1)");
  }
  if (!(adam.eps > 0.0)) fail("adam eps must be positive");
  if (!(aug_dropout >= 0.0 && aug_dropout < 1.0) ||
      !(encoder_dropout >= 0.0 && encoder_dropout < 1.0)) {
    fail("dropout rates must lie in [0, 1)");
  }
  if (batch == BatchMode::kNeighbor) {
    if (fanouts.size() != encoder_layers) {
      fail(std::to_string(fanouts.size()) + " fanouts for " +
           std::to_string(encoder_layers) + " encoder layers");
    }
    if (batch_size == 0) fail("batch_size must be positive");
    for (std::size_t f : fanouts) {
      if (f == 0) fail("fanouts must be positive");
    }
  }
  loss.Validate();
}

std::vector<std::size_t> TrainConfig::EncoderDims(std::size_t num_features) const {
  const std::size_t in = mode == AugmentMode::kPre ? aug_dim : num_features;
  const std::size_t out = mode == AugmentMode::kPre ? embed_dim : aug_dim;
  const std::size_t hidden = hidden_dim == 0 ? out : hidden_dim;
  std::vector<std::size_t> dims{in};
  for (std::size_t l = 1; l < encoder_layers; ++l) dims.push_back(hidden);
  dims.push_back(out);
  return dims;
}

std::size_t TrainConfig::AugmenterInDim(std::size_t num_features) const {
  return mode == AugmentMode::kPre ? num_features : aug_dim;
}

std::size_t TrainConfig::AugmenterOutDim() const {
  return mode == AugmentMode::kPre ? aug_dim : embed_dim;
}

template <typename T>
std::size_t Model<T>::ParameterCount() const {
  std::size_t n = 0;
  for (const Matrix<T>* p : Parameters(*this)) n += p->size();
  return n;
}

template <typename T>
std::vector<Matrix<T>*> Parameters(Model<T>& model) {
  std::vector<Matrix<T>*> out{&model.augmenter.w1};
  if (model.augmenter.use_bias) out.push_back(&model.augmenter.b1);
  out.push_back(&model.augmenter.w2);
  if (model.augmenter.use_bias) out.push_back(&model.augmenter.b2);
  for (std::size_t l = 0; l < model.encoder.num_layers(); ++l) {
    out.push_back(&model.encoder.weights[l]);
    if (model.encoder.use_bias) out.push_back(&model.encoder.biases[l]);
  }
  return out;
}

template <typename T>
std::vector<const Matrix<T>*> Parameters(const Model<T>& model) {
  auto mutable_ptrs = Parameters(const_cast<Model<T>&>(model));
  return {mutable_ptrs.begin(), mutable_ptrs.end()};
}

template <typename T>
Model<T> InitModel(const TrainConfig& config, std::size_t num_features) {
  config.Validate(num_features);
  Model<T> model;
  model.mode = config.mode;
  Rng head1 = MakeRng(config.seed, 10);
  Rng head2 = MakeRng(config.seed, 11);
  Rng encoder = MakeRng(config.seed, 12);
  model.augmenter = InitAugmenter<T>(config.AugmenterInDim(num_features),
                                     config.AugmenterOutDim(), config.aug_dropout,
                                     config.aug_bias, head1, head2);
  const auto dims = config.EncoderDims(num_features);
  model.encoder = InitEncoder<T>(dims, config.encoder_dropout, config.residual,
                                 config.encoder_bias, encoder);
  return model;
}

namespace {

template <typename T>
void CheckStepInputs(std::span<const LayerOperator<T>> layers,
                     const Matrix<T>& features, const Model<T>& model,
                     const TrainConfig& config, AugmentMode expected) {
  if (config.mode != expected || model.mode != expected) {
    throw InvalidArgument(fmt::format(
        "train_step_{}: config mode {} / model mode {}", AugmentModeName(expected),
        AugmentModeName(config.mode), AugmentModeName(model.mode)));
  }
  if (features.cols() != model.input_dim()) {
    throw InvalidArgument(fmt::format("train_step: features {} but model expects {} columns",
                                      features.ShapeString(), model.input_dim()));
  }
  if (layers.size() != model.encoder.num_layers()) {
    throw InvalidArgument(fmt::format("train_step: {} propagation layers for {} encoder layers",
                                      layers.size(), model.encoder.num_layers()));
  }
  if (layers.front().propagate->cols != features.rows()) {
    throw InvalidArgument(fmt::format("train_step: first layer reads {} rows, features have {}",
                                      layers.front().propagate->cols, features.rows()));
  }
}

template <typename T>
StepStats JointStep(std::span<const LayerOperator<T>> layers,
                    const Matrix<T>& features, Model<T>& model, Adam<T>& optimizer,
                    const TrainConfig& config, Rng& rng) {
  Tape<T> tape;
  const NodeId x = tape.Leaf(features, false);
  const AugmenterHandles aug = RegisterAugmenter(tape, model.augmenter);
  const EncoderHandles enc = RegisterEncoder(tape, model.encoder);

  StepStats stats;
  NodeId z1;
  NodeId z2;
  if (model.mode == AugmentMode::kPre) {
    const ViewPair views = AugmentPair(tape, x, aug, true, rng);
    z1 = Encode<T>(tape, layers, views.first, enc, true, rng);
    z2 = Encode<T>(tape, layers, views.second, enc, true, rng);
    stats.encoder_forwards = 2;
  } else {
    const NodeId z = Encode<T>(tape, layers, x, enc, true, rng);
    stats.encoder_forwards = 1;
    const ViewPair views = AugmentPair(tape, z, aug, true, rng);
    z1 = views.first;
    z2 = views.second;
  }
  const LossNodes loss =
      TotalLoss(tape, UnitRows(tape, z1), UnitRows(tape, z2), config.loss);
  stats.loss = static_cast<double>(tape.scalar(loss.total));
  stats.invariance = static_cast<double>(tape.scalar(loss.invariance));
  stats.constraint1 = static_cast<double>(tape.scalar(loss.constraint1));
  stats.constraint2 = static_cast<double>(tape.scalar(loss.constraint2));
  const std::pair<const char*, double> terms[] = {
      {"invariance", stats.invariance},
      {"constraint1", stats.constraint1},
      {"constraint2", stats.constraint2},
      {"total", stats.loss}};
  for (const auto& [name, v] : terms) {
    if (!std::isfinite(v)) {
      throw NumericalError(fmt::format("non-finite {} term ({})", name, v));
    }
  }

  tape.Backward(loss.total);
  std::vector<NodeId> handles{aug.w1};
  if (aug.use_bias) handles.push_back(aug.b1);
  handles.push_back(aug.w2);
  if (aug.use_bias) handles.push_back(aug.b2);
  for (std::size_t l = 0; l < enc.weights.size(); ++l) {
    handles.push_back(enc.weights[l]);
    if (enc.use_bias) handles.push_back(enc.biases[l]);
  }
  std::vector<const Matrix<T>*> grads;
  grads.reserve(handles.size());
  for (NodeId h : handles) grads.push_back(tape.grad(h));
  stats.constraint_bytes = tape.BufferBytes(OpKind::kGramRows) +
                           tape.BufferBytes(OpKind::kGramCols) +
                           tape.BufferBytes(OpKind::kSubIdentity);

  const auto params = Parameters(model);
  optimizer.Step(params, grads);
  return stats;
}

}  // namespace

template <typename T>
StepStats TrainStepPre(std::span<const LayerOperator<T>> layers,
                       const Matrix<T>& features, Model<T>& model,
                       Adam<T>& optimizer, const TrainConfig& config, Rng& rng) {
  CheckStepInputs(layers, features, model, config, AugmentMode::kPre);
  return JointStep(layers, features, model, optimizer, config, rng);
}

template <typename T>
StepStats TrainStepPost(std::span<const LayerOperator<T>> layers,
                        const Matrix<T>& features, Model<T>& model,
                        Adam<T>& optimizer, const TrainConfig& config, Rng& rng) {
  CheckStepInputs(layers, features, model, config, AugmentMode::kPost);
  return JointStep(layers, features, model, optimizer, config, rng);
}

std::string TrainHistory::ToCsv() const {
  std::string out = "epoch,loss,invariance,constraint1,constraint2,ms,peak_bytes\n";
  for (const EpochRecord& r : epochs) {
    out += fmt::format("{},{:.9g},{:.9g},{:.9g},{:.9g},{:.3f},{}\n", r.epoch, r.loss,
                       r.invariance, r.constraint1, r.constraint2, r.ms, r.peak_bytes);
  }
  return out;
}

void TrainHistory::WriteCsv(const std::string& path) const {
  WriteFileAtomic(path, ToCsv());
}

template <typename T>
Trainer<T>::Trainer(const Graph& graph, const Matrix<float>& features,
                    TrainConfig config)
    : graph_(graph),
      config_(std::move(config)),
      features_(features.Cast<T>()),
      model_(InitModel<T>(config_, features.cols())),
      optimizer_(config_.adam),
      dropout_rng_(MakeRng(config_.seed, 20)),
      sample_rng_(MakeRng(config_.seed, 21)) {
  if (features.rows() != static_cast<std::size_t>(graph.num_nodes())) {
    throw InvalidArgument(fmt::format("trainer: {} feature rows for {} nodes",
                                      features.rows(), graph.num_nodes()));
  }
  if (config_.batch == BatchMode::kFull) {
    full_ops_ = FullBatchOperators<T>(NormalizeAdjacency(graph), config_.encoder_layers);
  }
}

template <typename T>
StepStats Trainer<T>::Step(std::span<const LayerOperator<T>> layers,
                           const Matrix<T>& x) {
  if (config_.mode == AugmentMode::kPre) {
    return TrainStepPre<T>(layers, x, model_, optimizer_, config_, dropout_rng_);
  }
  return TrainStepPost<T>(layers, x, model_, optimizer_, config_, dropout_rng_);
}

template <typename T>
EpochRecord Trainer<T>::RunEpoch() {
  ResetPeakAllocation();
  const auto start = std::chrono::steady_clock::now();
  EpochRecord rec;
  rec.epoch = ++epoch_;
  std::size_t steps = 0;
  auto absorb = [&](const StepStats& s) {
    rec.loss += s.loss;
    rec.invariance += s.invariance;
    rec.constraint1 += s.constraint1;
    rec.constraint2 += s.constraint2;
    rec.encoder_forwards += s.encoder_forwards;
    rec.constraint_bytes = std::max(rec.constraint_bytes, s.constraint_bytes);
    ++steps;
  };

  if (config_.batch == BatchMode::kFull) {
    absorb(Step(full_ops_, features_));
  } else {
    std::vector<NodeIndex> order(static_cast<std::size_t>(graph_.num_nodes()));
    std::iota(order.begin(), order.end(), NodeIndex{0});
    std::shuffle(order.begin(), order.end(), sample_rng_);
    for (std::size_t begin = 0; begin < order.size(); begin += config_.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config_.batch_size);
      const std::span<const NodeIndex> seeds(order.data() + begin, end - begin);
      const SampledBlock block = NeighborSample(graph_, seeds, config_.fanouts, sample_rng_);
      const auto ops = BlockOperators<T>(block);
      const Matrix<T> x = GatherRows(features_, block.input_nodes());
      absorb(Step(ops, x));
    }
  }
  const double inv = 1.0 / static_cast<double>(std::max<std::size_t>(1, steps));
  rec.loss *= inv;
  rec.invariance *= inv;
  rec.constraint1 *= inv;
  rec.constraint2 *= inv;
  rec.ms = std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start)
               .count();
  rec.peak_bytes = PeakAllocatedBytes();
  return rec;
}

template <typename T>
FitResult<T> Fit(const DatasetBundle& dataset, const TrainConfig& config,
                 const EpochCallback<T>& on_epoch) {
  dataset.Validate();
  config.Validate(dataset.num_features());
  Trainer<T> trainer(dataset.graph, dataset.features, config);
  FitResult<T> result;
  for (int e = 1; e <= config.epochs; ++e) {
    EpochRecord rec;
    try {
      rec = trainer.RunEpoch();
    } catch (const NumericalError& err) {
      throw NumericalError(fmt::format("epoch {}: {}", e, err.what()));
    }
    result.history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec, trainer.model());
  }
  result.model = trainer.model();
  return result;
}

namespace {

template <typename T>
Matrix<T> SelectHead(const std::pair<Matrix<T>, Matrix<T>>& views, EmbedHead head) {
  switch (head) {
    case EmbedHead::kHead1:
      return views.first;
    case EmbedHead::kHead2:
      return views.second;
    case EmbedHead::kMean:
      break;
  }
  Matrix<T> out = views.first;
  auto a = out.values();
  auto b = views.second.values();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = (a[i] + b[i]) * T(0.5);
  return out;
}

}  // namespace

template <typename T>
Matrix<T> Embed(const Graph& graph, const Matrix<float>& features,
                const Model<T>& model, EmbedHead head) {
  if (features.cols() != model.input_dim()) {
    throw InvalidArgument(fmt::format("embed: features {} but model expects {} columns",
                                      features.ShapeString(), model.input_dim()));
  }
  if (features.rows() != static_cast<std::size_t>(graph.num_nodes())) {
    throw InvalidArgument("embed: feature rows do not match graph nodes");
  }
  const NormalizedAdjacency adj = NormalizeAdjacency(graph);
  const Matrix<T> x = features.Cast<T>();
  if (model.mode == AugmentMode::kPre) {
    const Matrix<T> view = SelectHead(AugmentPairEval(x, model.augmenter), head);
    return EncodeEval(adj, view, model.encoder);
  }
  const Matrix<T> z = EncodeEval(adj, x, model.encoder);
  return SelectHead(AugmentPairEval(z, model.augmenter), head);
}

template <typename T>
Matrix<T> Embed(const DatasetBundle& dataset, const Model<T>& model,
                const TrainConfig& config) {
  if (config.mode != model.mode) {
    throw InvalidArgument(fmt::format("embed: config mode {} but model was trained in {} mode",
                                      AugmentModeName(config.mode),
                                      AugmentModeName(model.mode)));
  }
  return Embed(dataset.graph, dataset.features, model, config.embed_head);
}

namespace {

constexpr std::string_view kCheckpointMagic = "GSRG";
constexpr std::uint32_t kCheckpointVersion = 1;
constexpr std::uint32_t kFlagAugBias = 1u << 0;
constexpr std::uint32_t kFlagEncoderBias = 1u << 1;
constexpr std::uint32_t kFlagResidual = 1u << 2;

}  // namespace

template <typename T>
void SaveCheckpoint(const std::string& path, const Model<T>& model) {
  ByteWriter w;
  w.Raw(kCheckpointMagic);
  w.U32(kCheckpointVersion);
  w.U32(model.mode == AugmentMode::kPre ? 0u : 1u);
  std::uint32_t flags = 0;
  if (model.augmenter.use_bias) flags |= kFlagAugBias;
  if (model.encoder.use_bias) flags |= kFlagEncoderBias;
  if (model.encoder.residual) flags |= kFlagResidual;
  w.U32(flags);
  w.F32(static_cast<float>(model.augmenter.dropout));
  w.F32(static_cast<float>(model.encoder.dropout));
  const auto params = Parameters(model);
  w.U32(static_cast<std::uint32_t>(params.size()));
  for (const Matrix<T>* p : params) {
    w.U64(p->rows());
    w.U64(p->cols());
  }
  for (const Matrix<T>* p : params) {
    for (T v : p->values()) w.F32(static_cast<float>(v));
  }
  WriteFileAtomic(path, w.bytes());
}

template <typename T>
Model<T> LoadCheckpoint(const std::string& path) {
  const std::string data = ReadFileBytes(path);
  ByteReader r(data, path);
  if (r.Raw(kCheckpointMagic.size()) != kCheckpointMagic) {
    throw IoError(path + ": not a checkpoint (bad magic)");
  }
  const std::uint32_t version = r.U32();
  if (version != kCheckpointVersion) {
    throw IoError(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t mode = r.U32();
  if (mode > 1) throw IoError(path + ": bad mode flag " + std::to_string(mode));
  const std::uint32_t flags = r.U32();
  Model<T> model;
  model.mode = mode == 0 ? AugmentMode::kPre : AugmentMode::kPost;
  model.augmenter.use_bias = (flags & kFlagAugBias) != 0;
  model.encoder.use_bias = (flags & kFlagEncoderBias) != 0;
  model.encoder.residual = (flags & kFlagResidual) != 0;
  model.augmenter.dropout = r.F32();
  model.encoder.dropout = r.F32();

  const std::uint32_t count = r.U32();
  const std::size_t aug_tensors = model.augmenter.use_bias ? 4 : 2;
  const std::size_t per_layer = model.encoder.use_bias ? 2 : 1;
  if (count < aug_tensors + per_layer || (count - aug_tensors) % per_layer != 0) {
    throw IoError(path + ": tensor count " + std::to_string(count) +
                  " does not fit the declared layout");
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> shapes(count);
  std::uint64_t total = 0;
  for (auto& [rows, cols] : shapes) {
    rows = r.U64();
    cols = r.U64();
    if (rows > (1ull << 32) || cols > (1ull << 32)) {
      throw IoError(path + ": implausible tensor shape");
    }
    total += rows * cols;
  }
  if (r.remaining() != total * 4) {
    throw IoError(path + ": payload is " + std::to_string(r.remaining()) +
                  " bytes, shape table needs " + std::to_string(total * 4));
  }
  auto read_tensor = [&](std::size_t i) {
    Matrix<T> m(shapes[i].first, shapes[i].second);
    for (T& v : m.values()) v = static_cast<T>(r.F32());
    return m;
  };
  std::size_t i = 0;
  model.augmenter.w1 = read_tensor(i++);
  if (model.augmenter.use_bias) model.augmenter.b1 = read_tensor(i++);
  model.augmenter.w2 = read_tensor(i++);
  if (model.augmenter.use_bias) model.augmenter.b2 = read_tensor(i++);
  while (i < count) {
    model.encoder.weights.push_back(read_tensor(i++));
    if (model.encoder.use_bias) model.encoder.biases.push_back(read_tensor(i++));
  }

  // Structural checks: heads agree, biases are rows, layers chain, and the
  // augmenter sits on the correct side of the encoder.
  const auto& a = model.augmenter;
  auto bad = [&](const std::string& why) { throw IoError(path + ": " + why); };
  if (!a.w1.SameShape(a.w2)) bad("augmentation heads differ in shape");
  if (a.use_bias && (a.b1.rows() != 1 || a.b1.cols() != a.w1.cols() ||
                     !a.b1.SameShape(a.b2))) {
    bad("augmenter bias shape mismatch");
  }
  const auto& e = model.encoder;
  for (std::size_t l = 0; l < e.weights.size(); ++l) {
    if (l > 0 && e.weights[l].rows() != e.weights[l - 1].cols()) bad("encoder layers do not chain");
    if (e.use_bias && (e.biases[l].rows() != 1 || e.biases[l].cols() != e.weights[l].cols())) {
      bad("encoder bias shape mismatch");
    }
  }
  if (model.mode == AugmentMode::kPre ? a.out_dim() != e.in_dim()
                                      : e.out_dim() != a.in_dim()) {
    bad("augmenter and encoder widths do not connect");
  }
  return model;
}

#define SURGEON_INSTANTIATE_TRAINER(T)                                          \
  template struct Model<T>;                                                     \
  template std::vector<Matrix<T>*> Parameters<T>(Model<T>&);                    \
  template std::vector<const Matrix<T>*> Parameters<T>(const Model<T>&);        \
  template Model<T> InitModel<T>(const TrainConfig&, std::size_t);              \
  template StepStats TrainStepPre<T>(std::span<const LayerOperator<T>>,         \
                                     const Matrix<T>&, Model<T>&, Adam<T>&,     \
                                     const TrainConfig&, Rng&);                 \
  template StepStats TrainStepPost<T>(std::span<const LayerOperator<T>>,        \
                                      const Matrix<T>&, Model<T>&, Adam<T>&,    \
                                      const TrainConfig&, Rng&);                \
  template class Trainer<T>;                                                    \
  template FitResult<T> Fit<T>(const DatasetBundle&, const TrainConfig&,        \
                               const EpochCallback<T>&);                        \
  template Matrix<T> Embed<T>(const Graph&, const Matrix<float>&,               \
                              const Model<T>&, EmbedHead);                      \
  template Matrix<T> Embed<T>(const DatasetBundle&, const Model<T>&,            \
                              const TrainConfig&);                              \
  template void SaveCheckpoint<T>(const std::string&, const Model<T>&);         \
  template Model<T> LoadCheckpoint<T>(const std::string&);

SURGEON_INSTANTIATE_TRAINER(float)
SURGEON_INSTANTIATE_TRAINER(double)

}  // namespace surgeon
