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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "surgeon/dataio.h"
#include "surgeon/error.h"
#include "surgeon/fileio.h"
#include "surgeon/trainer.h"
#include "test_util.h"

namespace surgeon {
namespace {

using ::surgeon::testing::TempDir;

DatasetBundle SmallDataset(std::uint64_t seed = 0) {
  SbmConfig c;
  c.blocks = 3;
  c.nodes_per_block = 30;
  c.p_in = 0.2;
  c.p_out = 0.01;
  c.feature_dim = 8;
  c.seed = seed;
  return GenerateSbm(c);
}

TrainConfig SmallConfig(AugmentMode mode, ConstraintMode constraint = ConstraintMode::kColumn) {
  TrainConfig c;
  c.mode = mode;
  c.epochs = 5;
  c.aug_dim = 8;
  c.hidden_dim = 6;
  c.embed_dim = 4;
  c.loss.constraint = constraint;
  c.loss.invariance = Reduction::kSum;
  return c;
}

template <typename T>
std::vector<Matrix<T>> Snapshot(const Model<T>& m) {
  std::vector<Matrix<T>> out;
  for (const Matrix<T>* p : Parameters(m)) out.push_back(*p);
  return out;
}

TEST(TrainConfigTest, ValidationNamesTheProblem) {
  TrainConfig c;
  c.epochs = 0;
  EXPECT_THROW(c.Validate(8), InvalidArgument);
  c = TrainConfig{};
  c.adam.lr = -1;
  EXPECT_THROW(c.Validate(8), InvalidArgument);
  c = TrainConfig{};
  c.batch = BatchMode::kNeighbor;
  c.fanouts = {5};
  EXPECT_THROW(c.Validate(8), InvalidArgument);  // two layers, one fanout
  c.fanouts = {5, 5};
  EXPECT_NO_THROW(c.Validate(8));
}

TEST(TrainConfigTest, EncoderWidths) {
  TrainConfig c = SmallConfig(AugmentMode::kPre);
  c.encoder_layers = 3;
  EXPECT_EQ(c.EncoderDims(10), (std::vector<std::size_t>{8, 6, 6, 4}));
  EXPECT_EQ(c.AugmenterInDim(10), 10u);
  EXPECT_EQ(c.AugmenterOutDim(), 8u);
  c.mode = AugmentMode::kPost;
  EXPECT_EQ(c.EncoderDims(10), (std::vector<std::size_t>{10, 6, 6, 8}));
  EXPECT_EQ(c.AugmenterInDim(10), 8u);
  EXPECT_EQ(c.AugmenterOutDim(), 4u);
  c.hidden_dim = 0;
  EXPECT_EQ(c.EncoderDims(10), (std::vector<std::size_t>{10, 8, 8, 8}));
}

TEST(TrainerTest, ModelShapesPerMode) {
  for (AugmentMode mode : {AugmentMode::kPre, AugmentMode::kPost}) {
    const TrainConfig c = SmallConfig(mode);
    const Model<float> m = InitModel<float>(c, 8);
    EXPECT_EQ(m.input_dim(), 8u);
    EXPECT_EQ(m.output_dim(), 4u);
    EXPECT_EQ(Parameters(m).size(), 4u + 2u * c.encoder_layers);
  }
}

TEST(TrainerTest, SmallStepDecreasesLoss) {
  const DatasetBundle d = SmallDataset();
  for (AugmentMode mode : {AugmentMode::kPre, AugmentMode::kPost}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      TrainConfig c = SmallConfig(mode);
      c.seed = seed;
      c.adam.lr = 1e-3;
      // Wide enough that no view row is exactly zero at init; unit-row
      // normalization is discontinuous there.
      c.hidden_dim = 16;
      c.aug_dropout = c.encoder_dropout = 0.0;
      Trainer<double> t(d.graph, d.features, c);
      const double before = t.RunEpoch().loss;
      const double after = t.RunEpoch().loss;
      EXPECT_LT(after, before) << AugmentModeName(mode) << " seed " << seed;
    }
  }
}

TEST(TrainerTest, IdenticalHeadsWithoutConstraintGiveZeroLoss) {
  const DatasetBundle d = SmallDataset();
  for (AugmentMode mode : {AugmentMode::kPre, AugmentMode::kPost}) {
    TrainConfig c = SmallConfig(mode);
    c.loss.gamma = 0.0;
    c.aug_dropout = c.encoder_dropout = 0.0;
    Trainer<double> t(d.graph, d.features, c);
    auto& aug = t.mutable_model().augmenter;
    aug.w2 = aug.w1;
    aug.b2 = aug.b1;
    const EpochRecord r = t.RunEpoch();
    EXPECT_NEAR(r.loss, 0.0, 1e-12);
    EXPECT_NEAR(r.invariance, 0.0, 1e-12);
  }
}

TEST(TrainerTest, EncoderForwardCounts) {
  const DatasetBundle d = SmallDataset();
  Trainer<float> pre(d.graph, d.features, SmallConfig(AugmentMode::kPre));
  Trainer<float> post(d.graph, d.features, SmallConfig(AugmentMode::kPost));
  EXPECT_EQ(pre.RunEpoch().encoder_forwards, 2u);
  EXPECT_EQ(post.RunEpoch().encoder_forwards, 1u);
}

TEST(TrainerTest, EveryParameterTensorMoves) {
  const DatasetBundle d = SmallDataset();
  for (AugmentMode mode : {AugmentMode::kPre, AugmentMode::kPost}) {
    Trainer<double> t(d.graph, d.features, SmallConfig(mode));
    const auto before = Snapshot(t.model());
    t.RunEpoch();
    t.RunEpoch();
    const auto after = Snapshot(t.model());
    for (std::size_t i = 0; i < before.size(); ++i) {
      EXPECT_NE(before[i], after[i]) << AugmentModeName(mode) << " tensor " << i;
    }
  }
}

TEST(TrainerTest, FitIsDeterministic) {
  const DatasetBundle d = SmallDataset();
  const TrainConfig c = SmallConfig(AugmentMode::kPre);
  const FitResult<float> a = Fit<float>(d, c);
  const FitResult<float> b = Fit<float>(d, c);
  EXPECT_EQ(Snapshot(a.model), Snapshot(b.model));
  ASSERT_EQ(a.history.epochs.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(a.history.epochs[i].loss, b.history.epochs[i].loss);
  }
  TrainConfig other = c;
  other.seed = 1;
  EXPECT_NE(Snapshot(Fit<float>(d, other).model), Snapshot(a.model));
}

TEST(TrainerTest, ConstraintTermsShrinkDuringTraining) {
  const DatasetBundle d = SmallDataset();
  for (ConstraintMode cm : {ConstraintMode::kRow, ConstraintMode::kColumn}) {
    TrainConfig c = SmallConfig(AugmentMode::kPre, cm);
    c.epochs = 60;
    c.adam.lr = 0.01;
    const FitResult<double> r = Fit<double>(d, c);
    const EpochRecord& first = r.history.epochs.front();
    const EpochRecord& last = r.history.epochs.back();
    EXPECT_LT(last.constraint1, first.constraint1) << ConstraintModeName(cm);
    EXPECT_LT(last.constraint2, first.constraint2) << ConstraintModeName(cm);
  }
}

TEST(TrainerTest, SaturatedNeighborEpochMatchesFullBatch) {
  const DatasetBundle d = SmallDataset();
  for (AugmentMode mode : {AugmentMode::kPre, AugmentMode::kPost}) {
    TrainConfig c = SmallConfig(mode);
    c.aug_dropout = c.encoder_dropout = 0.0;
    Trainer<double> full(d.graph, d.features, c);
    c.batch = BatchMode::kNeighbor;
    c.fanouts.assign(c.encoder_layers, kAllNeighbors);
    c.batch_size = static_cast<std::size_t>(d.num_nodes());
    Trainer<double> sampled(d.graph, d.features, c);
    for (int e = 0; e < 3; ++e) {
      EXPECT_NEAR(full.RunEpoch().loss, sampled.RunEpoch().loss, 1e-9) << e;
    }
    // Shuffled batch order only permutes rows.
    const auto a = Snapshot(full.model()), b = Snapshot(sampled.model());
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t k = 0; k < a[i].size(); ++k) {
        EXPECT_NEAR(a[i].data()[k], b[i].data()[k], 1e-9);
      }
    }
  }
}

TEST(TrainerTest, ShapeErrorsLeaveModelUntouched) {
  const DatasetBundle d = SmallDataset();
  const TrainConfig c = SmallConfig(AugmentMode::kPre);
  Model<double> m = InitModel<double>(c, 8);
  const auto before = Snapshot(m);
  Adam<double> adam(c.adam);
  Rng rng = MakeRng(0, 0);
  const auto ops = FullBatchOperators<double>(NormalizeAdjacency(d.graph), c.encoder_layers);
  const Matrix<double> wrong(static_cast<std::size_t>(d.num_nodes()), 5);
  EXPECT_THROW(TrainStepPre<double>(ops, wrong, m, adam, c, rng), InvalidArgument);
  EXPECT_EQ(Snapshot(m), before);
  EXPECT_EQ(adam.step_count(), 0);
}

TEST(TrainerTest, DivergenceRaisesNumericalError) {
  const DatasetBundle d = SmallDataset();
  TrainConfig c = SmallConfig(AugmentMode::kPre);
  c.adam.lr = 1e38;  // float parameters overflow
  c.epochs = 20;
  try {
    Fit<float>(d, c);
    FAIL() << "expected divergence";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos) << e.what();
  }
}

TEST(EmbedTest, WidthDeterminismAndFiniteness) {
  const DatasetBundle d = SmallDataset();
  for (AugmentMode mode : {AugmentMode::kPre, AugmentMode::kPost}) {
    const TrainConfig c = SmallConfig(mode);
    const FitResult<float> r = Fit<float>(d, c);
    const Matrix<float> z = Embed(d, r.model, c);
    EXPECT_EQ(z.rows(), static_cast<std::size_t>(d.num_nodes()));
    EXPECT_EQ(z.cols(), 4u);
    EXPECT_TRUE(z.AllFinite());
    EXPECT_EQ(z, Embed(d, r.model, c));
    EXPECT_NE(Embed(d.graph, d.features, r.model, EmbedHead::kHead1),
              Embed(d.graph, d.features, r.model, EmbedHead::kHead2));
  }
}

TEST(EmbedTest, ModeMismatchIsRejected) {
  const DatasetBundle d = SmallDataset();
  const Model<float> m = InitModel<float>(SmallConfig(AugmentMode::kPost), 8);
  EXPECT_THROW(Embed(d, m, SmallConfig(AugmentMode::kPre)), InvalidArgument);
}

TEST(CheckpointTest, RoundTripPreservesModel) {
  TempDir dir;
  const DatasetBundle d = SmallDataset();
  for (AugmentMode mode : {AugmentMode::kPre, AugmentMode::kPost}) {
    TrainConfig c = SmallConfig(mode);
    c.residual = false;
    c.aug_bias = false;
    const FitResult<float> r = Fit<float>(d, c);
    SaveCheckpoint(dir / "m.gsrg", r.model);
    const Model<float> back = LoadCheckpoint<float>(dir / "m.gsrg");
    EXPECT_EQ(back.mode, mode);
    EXPECT_FALSE(back.encoder.residual);
    EXPECT_FALSE(back.augmenter.use_bias);
    EXPECT_TRUE(back.encoder.use_bias);
    EXPECT_EQ(Snapshot(back), Snapshot(r.model));
    EXPECT_EQ(Embed(d, back, c), Embed(d, r.model, c));
  }
}

TEST(CheckpointTest, CorruptFilesAreRejected) {
  TempDir dir;
  const Model<float> m = InitModel<float>(SmallConfig(AugmentMode::kPre), 8);
  SaveCheckpoint(dir / "m.gsrg", m);
  const std::string bytes = ReadFileBytes(dir / "m.gsrg");
  WriteFileAtomic(dir / "short.gsrg", bytes.substr(0, bytes.size() - 4));
  EXPECT_THROW(LoadCheckpoint<float>(dir / "short.gsrg"), IoError);
  WriteFileAtomic(dir / "long.gsrg", bytes + "xxxx");
  EXPECT_THROW(LoadCheckpoint<float>(dir / "long.gsrg"), IoError);
  std::string magic = bytes;
  magic[1] = 'Z';
  WriteFileAtomic(dir / "magic.gsrg", magic);
  EXPECT_THROW(LoadCheckpoint<float>(dir / "magic.gsrg"), IoError);
  EXPECT_THROW(LoadCheckpoint<float>(dir / "absent.gsrg"), IoError);
}

TEST(HistoryTest, CsvLayout) {
  TrainHistory h;
  EpochRecord r;
  r.epoch = 1;
  r.loss = 1.5;
  h.epochs.push_back(r);
  const std::string csv = h.ToCsv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "epoch,loss,invariance,constraint1,constraint2,ms,peak_bytes");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

}  // namespace
}  // namespace surgeon
