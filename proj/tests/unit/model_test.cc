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
#include <memory>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "surgeon/augmenter.h"
#include "surgeon/encoder.h"
#include "surgeon/error.h"
#include "surgeon/graph.h"
#include "surgeon/optimizer.h"
#include "test_util.h"

namespace surgeon {
namespace {

using ::surgeon::testing::DenseNormalizedAdjacency;
using ::surgeon::testing::RandomGraph;
using ::surgeon::testing::RandomMatrix;
using ::surgeon::testing::ToEigen;

Eigen::RowVectorXd Row(const Matrix<double>& bias) { return ToEigen(bias).row(0); }

AugmenterParams<double> RandomAugmenter(std::size_t in, std::size_t out) {
  Rng r1 = MakeRng(1, 1), r2 = MakeRng(1, 2);
  AugmenterParams<double> p = InitAugmenter<double>(in, out, 0.0, true, r1, r2);
  p.b1 = RandomMatrix(1, out, 3);
  p.b2 = RandomMatrix(1, out, 4);
  return p;
}

TEST(AugmenterTest, GlorotBoundsAndZeroBiases) {
  Rng r1 = MakeRng(0, 1), r2 = MakeRng(0, 2);
  const auto p = InitAugmenter<double>(30, 20, 0.2, true, r1, r2);
  const double limit = std::sqrt(6.0 / 50.0);
  for (double v : p.w1.values()) EXPECT_LE(std::abs(v), limit);
  for (double v : p.b1.values()) EXPECT_EQ(v, 0.0);
  EXPECT_NE(p.w1, p.w2);
  // Sample variance of U(-l, l) is l^2 / 3.
  double sq = 0;
  for (double v : p.w1.values()) sq += v * v;
  EXPECT_NEAR(sq / p.w1.size(), limit * limit / 3.0, 0.01);
}

TEST(AugmenterTest, EvalViewsMatchAffineOracle) {
  const auto p = RandomAugmenter(5, 3);
  const Matrix<double> x = RandomMatrix(7, 5, 5);
  const auto [v1, v2] = AugmentPairEval(x, p);
  const Eigen::MatrixXd ex = ToEigen(x);
  const Eigen::MatrixXd o1 = (ex * ToEigen(p.w1)).rowwise() + Row(p.b1);
  const Eigen::MatrixXd o2 = (ex * ToEigen(p.w2)).rowwise() + Row(p.b2);
  EXPECT_TRUE(ToEigen(v1).isApprox(o1, 1e-14));
  EXPECT_TRUE(ToEigen(v2).isApprox(o2, 1e-14));
}

TEST(AugmenterTest, BiasCanBeDisabled) {
  Rng r1 = MakeRng(2, 1), r2 = MakeRng(2, 2);
  const auto p = InitAugmenter<double>(4, 3, 0.0, false, r1, r2);
  const Matrix<double> x = RandomMatrix(3, 4, 6);
  const auto [v1, v2] = AugmentPairEval(x, p);
  EXPECT_TRUE(ToEigen(v1).isApprox(ToEigen(x) * ToEigen(p.w1), 1e-14));
}

TEST(AugmenterTest, TrainModeDropsIndependentlyPerHead) {
  auto p = RandomAugmenter(6, 40);
  p.w2 = p.w1;
  p.b2 = p.b1;
  p.dropout = 0.5;
  Tape<double> t;
  const auto h = RegisterAugmenter(t, p, false);
  Rng rng = MakeRng(7, 0);
  const ViewPair v = AugmentPair(t, t.Leaf(RandomMatrix(10, 6, 7), false), h, true, rng);
  EXPECT_NE(t.value(v.first), t.value(v.second));
  std::size_t zeros = 0;
  for (double x : t.value(v.first).values()) zeros += x == 0.0;
  EXPECT_GT(zeros, 100u);
  EXPECT_LT(zeros, 300u);
}

TEST(AugmenterTest, RowPermutationEquivariant) {
  const auto p = RandomAugmenter(4, 3);
  const Matrix<double> x = RandomMatrix(6, 4, 8);
  const std::vector<std::size_t> perm = {3, 0, 5, 1, 4, 2};
  const auto [a, unused_a] = AugmentPairEval(x, p);
  const auto [b, unused_b] = AugmentPairEval(GatherRows(x, std::span<const std::size_t>(perm)), p);
  EXPECT_TRUE(ToEigen(b).isApprox(ToEigen(GatherRows(a, std::span<const std::size_t>(perm))), 1e-14));
}

EncoderParams<double> RandomEncoder(std::vector<std::size_t> dims, bool residual) {
  Rng rng = MakeRng(9, 0);
  EncoderParams<double> p = InitEncoder<double>(dims, 0.0, residual, true, rng);
  for (std::size_t l = 0; l < p.biases.size(); ++l) {
    p.biases[l] = RandomMatrix(1, dims[l + 1], 100 + l);
  }
  return p;
}

// Dense forward: ReLU on hidden layers, linear last layer, identity skip
// whenever the width is unchanged.
Eigen::MatrixXd DenseEncode(const Eigen::MatrixXd& a, Eigen::MatrixXd h,
                            const EncoderParams<double>& p) {
  for (std::size_t l = 0; l < p.num_layers(); ++l) {
    Eigen::MatrixXd out = (a * h * ToEigen(p.weights[l])).rowwise() + Row(p.biases[l]);
    if (l + 1 < p.num_layers()) out = out.cwiseMax(0.0);
    if (p.residual && out.cols() == h.cols()) out += h;
    h = out;
  }
  return h;
}

TEST(EncoderTest, InitShapesAndErrors) {
  Rng rng = MakeRng(0, 0);
  const std::vector<std::size_t> dims = {8, 6, 6, 3};
  const auto p = InitEncoder<double>(dims, 0.2, true, true, rng);
  ASSERT_EQ(p.num_layers(), 3u);
  EXPECT_EQ(p.in_dim(), 8u);
  EXPECT_EQ(p.out_dim(), 3u);
  EXPECT_EQ(p.biases[1].cols(), 6u);
  const std::vector<std::size_t> bad = {8};
  EXPECT_THROW(InitEncoder<double>(bad, 0.2, true, true, rng), InvalidArgument);
}

TEST(EncoderTest, EvalMatchesDenseOracle) {
  const Graph g = RandomGraph(12, 0.3, 1);
  const NormalizedAdjacency adj = NormalizeAdjacency(g);
  const Eigen::MatrixXd a = DenseNormalizedAdjacency(g);
  const Matrix<double> x = RandomMatrix(12, 5, 2);
  for (bool residual : {true, false}) {
    const auto p = RandomEncoder({5, 4, 4, 4}, residual);
    EXPECT_TRUE(ToEigen(EncodeEval(adj, x, p)).isApprox(DenseEncode(a, ToEigen(x), p), 1e-12))
        << residual;
  }
}

TEST(EncoderTest, NodePermutationEquivariant) {
  const Graph g = RandomGraph(10, 0.35, 3);
  const std::vector<NodeIndex> perm = {4, 9, 0, 7, 2, 5, 1, 8, 6, 3};  // new -> old
  std::vector<NodeIndex> inverse(10);
  for (NodeIndex i = 0; i < 10; ++i) inverse[perm[i]] = i;
  std::vector<Edge> edges;
  for (const Edge& e : g.EdgeList()) edges.push_back({inverse[e.src], inverse[e.dst]});
  const Graph pg = Graph::Build(edges, 10);
  const Matrix<double> x = RandomMatrix(10, 4, 4);
  const auto p = RandomEncoder({4, 4, 3}, true);
  const Matrix<double> out = EncodeEval(NormalizeAdjacency(g), x, p);
  const Matrix<double> pout =
      EncodeEval(NormalizeAdjacency(pg), GatherRows(x, std::span<const NodeIndex>(perm)), p);
  EXPECT_TRUE(ToEigen(pout).isApprox(
      ToEigen(GatherRows(out, std::span<const NodeIndex>(perm))), 1e-12));
}

TEST(EncoderTest, SaturatedBlockEqualsFullBatch) {
  const Graph g = RandomGraph(30, 0.15, 5);
  const NormalizedAdjacency adj = NormalizeAdjacency(g);
  const Matrix<double> x = RandomMatrix(30, 6, 6);
  const auto p = RandomEncoder({6, 5, 5, 3}, true);
  const Matrix<double> full = EncodeEval(adj, x, p);
  const std::vector<NodeIndex> seeds = {2, 17, 9, 25};
  const std::vector<std::size_t> fanouts(3, kAllNeighbors);
  Rng rng = MakeRng(0, 0);
  const SampledBlock block = NeighborSample(g, seeds, fanouts, rng);
  const auto ops = BlockOperators<double>(block);
  Tape<double> t;
  const EncoderHandles h = RegisterEncoder(t, p, false);
  const NodeId in = t.Leaf(GatherRows(x, block.input_nodes()), false);
  const Matrix<double>& out = t.value(Encode<double>(t, ops, in, h, false, rng));
  ASSERT_EQ(out.rows(), seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    for (std::size_t c = 0; c < out.cols(); ++c) {
      EXPECT_NEAR(out(i, c), full(seeds[i], c), 1e-12);
    }
  }
}

TEST(EncoderTest, LayerCountMismatchIsReported) {
  const Graph g = RandomGraph(6, 0.5, 7);
  const auto p = RandomEncoder({3, 3, 2}, true);
  const auto ops = FullBatchOperators<double>(NormalizeAdjacency(g), 1);
  Tape<double> t;
  const EncoderHandles h = RegisterEncoder(t, p, false);
  Rng rng = MakeRng(0, 0);
  EXPECT_THROW(Encode<double>(t, ops, t.Leaf(RandomMatrix(6, 3, 8), false), h, false, rng),
               InvalidArgument);
}

TEST(AdamTest, FirstStepsMatchHandComputation) {
  AdamConfig cfg;
  cfg.lr = 0.1;
  Adam<double> adam(cfg);
  Matrix<double> p = Matrix<double>::FromRows({{1.0, -2.0}});
  const Matrix<double> g1 = Matrix<double>::FromRows({{0.5, -3.0}});
  Matrix<double>* params[] = {&p};
  const Matrix<double>* grads[] = {&g1};
  adam.Step(params, grads);
  // Bias-corrected first step moves each coordinate by lr * g / (|g| + eps).
  const double p1 = 1.0 - 0.1 * 0.5 / (0.5 + 1e-8);
  EXPECT_NEAR(p(0, 0), p1, 1e-15);
  EXPECT_NEAR(p(0, 1), -2.0 + 0.1 * 3.0 / (3.0 + 1e-8), 1e-15);
  const Matrix<double> g2 = Matrix<double>::FromRows({{-0.5, 1.0}});
  const Matrix<double>* grads2[] = {&g2};
  adam.Step(params, grads2);
  const double m = 0.9 * 0.1 * 0.5 + 0.1 * -0.5;
  const double v = 0.999 * 0.001 * 0.25 + 0.001 * 0.25;
  const double expected =
      p1 - 0.1 * (m / (1 - 0.81)) / (std::sqrt(v / (1 - 0.999 * 0.999)) + 1e-8);
  EXPECT_NEAR(p(0, 0), expected, 1e-12);
  EXPECT_EQ(adam.step_count(), 2);
}

TEST(AdamTest, NullGradientDecaysMomentOnly) {
  Adam<double> adam;
  Matrix<double> p(1, 1, 3.0);
  Matrix<double>* params[] = {&p};
  const Matrix<double>* grads[] = {nullptr};
  adam.Step(params, grads);
  EXPECT_EQ(p(0, 0), 3.0);
}

TEST(AdamTest, ShapeMismatchThrows) {
  Adam<double> adam;
  Matrix<double> p(2, 2);
  const Matrix<double> g(2, 3);
  Matrix<double>* params[] = {&p};
  const Matrix<double>* grads[] = {&g};
  EXPECT_THROW(adam.Step(params, grads), InvalidArgument);
}

}  // namespace
}  // namespace surgeon
