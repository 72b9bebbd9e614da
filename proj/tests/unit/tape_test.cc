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
#include <ostream>

#include <gtest/gtest.h>

#include "surgeon/error.h"
#include "surgeon/gradcheck.h"
#include "surgeon/memory.h"
#include "surgeon/tape.h"
#include "test_util.h"

namespace surgeon {

// Readable parameter names in test output.
void PrintTo(OpKind kind, std::ostream* os) { *os << OpName(kind); }

namespace {

using ::surgeon::testing::RandomMatrix;
using ::surgeon::testing::ToEigen;

TEST(TapeTest, OpNamesRoundTrip) {
  for (std::size_t k = 0; k < kNumOpKinds; ++k) {
    const auto kind = static_cast<OpKind>(k);
    EXPECT_EQ(OpFromName(OpName(kind)), kind);
  }
  EXPECT_FALSE(OpFromName("softmax").has_value());
}

TEST(TapeTest, ForwardValuesMatchDenseOracles) {
  const Matrix<double> a = RandomMatrix(4, 3, 1);
  const Matrix<double> b = RandomMatrix(3, 5, 2);
  const Matrix<double> c = RandomMatrix(4, 3, 3);
  Tape<double> t;
  const NodeId na = t.Leaf(a, false), nb = t.Leaf(b, false), nc = t.Leaf(c, false);
  const auto ea = ToEigen(a), eb = ToEigen(b), ec = ToEigen(c);
  EXPECT_TRUE(ToEigen(t.value(t.MatMul(na, nb))).isApprox(ea * eb, 1e-14));
  EXPECT_TRUE(ToEigen(t.value(t.Add(na, nc))).isApprox(ea + ec, 1e-15));
  EXPECT_TRUE(ToEigen(t.value(t.GramRows(na))).isApprox(ea * ea.transpose(), 1e-14));
  EXPECT_TRUE(ToEigen(t.value(t.GramCols(na))).isApprox(ea.transpose() * ea, 1e-14));
  EXPECT_TRUE(ToEigen(t.value(t.Relu(na))).isApprox(ea.cwiseMax(0.0), 0.0));
  EXPECT_TRUE(ToEigen(t.value(t.Scale(na, -2.5))).isApprox(-2.5 * ea, 0.0));
  EXPECT_TRUE(ToEigen(t.value(t.MeanPair(na, nc))).isApprox(0.5 * (ea + ec), 1e-15));
  EXPECT_NEAR(t.scalar(t.FrobNorm(na)), ea.norm(), 1e-14);
  EXPECT_NEAR(t.scalar(t.MseMean(na, nc)), (ea - ec).squaredNorm() / 12.0, 1e-14);
  const Matrix<double> sq = RandomMatrix(3, 3, 4);
  const NodeId nsq = t.Leaf(sq, false);
  EXPECT_TRUE(ToEigen(t.value(t.SubIdentity(nsq)))
                  .isApprox(ToEigen(sq) - Eigen::MatrixXd::Identity(3, 3), 1e-15));
  const Matrix<double> bias = RandomMatrix(1, 3, 5);
  const Eigen::MatrixXd with_bias =
      ea + Eigen::VectorXd::Ones(4) * ToEigen(bias).row(0);
  EXPECT_TRUE(ToEigen(t.value(t.AddBias(na, t.Leaf(bias, false)))).isApprox(with_bias, 1e-15));
}

TEST(TapeTest, RowL2NormalizeExamples) {
  Tape<double> t;
  const auto v = t.value(t.RowL2Normalize(t.Leaf(Matrix<double>::FromRows({{3, 4}}), false)));
  EXPECT_DOUBLE_EQ(v(0, 0), 0.6);
  EXPECT_DOUBLE_EQ(v(0, 1), 0.8);
  const auto zero = t.value(t.RowL2Normalize(t.Leaf(Matrix<double>(2, 3), false)));
  for (double x : zero.values()) EXPECT_EQ(x, 0.0);
  const auto rnd = t.value(t.RowL2Normalize(t.Leaf(RandomMatrix(8, 5, 6), false)));
  for (std::size_t r = 0; r < 8; ++r) {
    double s = 0;
    for (double x : rnd.row(r)) s += x * x;
    EXPECT_NEAR(std::sqrt(s), 1.0, 1e-6);
  }
}

TEST(TapeTest, ReluPropagatesNan) {
  Tape<double> t;
  const Matrix<double> x = Matrix<double>::FromRows({{std::nan(""), -1.0, 2.0}});
  const Matrix<double>& y = t.value(t.Relu(t.Leaf(x, false)));
  EXPECT_TRUE(std::isnan(y(0, 0)));
  EXPECT_EQ(y(0, 1), 0.0);
  EXPECT_EQ(y(0, 2), 2.0);
}

TEST(TapeTest, ZeroRowHasFiniteGradient) {
  Tape<double> t;
  const NodeId x = t.Leaf(Matrix<double>(2, 3), true);
  const NodeId loss = t.FrobNorm(t.Scale(t.RowL2Normalize(x), 1.0));
  t.Backward(loss);
  ASSERT_NE(t.grad(x), nullptr);
  EXPECT_TRUE(t.grad(x)->AllFinite());
}

TEST(TapeTest, DropoutZeroIsIdentityAndDrawsNothing) {
  const Matrix<double> x = RandomMatrix(5, 4, 7);
  Tape<double> t;
  Rng rng = MakeRng(3, 0);
  const Rng before = rng;
  EXPECT_EQ(t.value(t.Dropout(t.Leaf(x, false), 0.0, rng)), x);
  EXPECT_EQ(rng, before);
}

TEST(TapeTest, DropoutIsInvertedAndUnbiased) {
  Matrix<double> ones(200, 50, 1.0);
  Tape<double> t;
  Rng rng = MakeRng(4, 0);
  const Matrix<double> y = t.value(t.Dropout(t.Leaf(ones, false), 0.2, rng));
  double sum = 0;
  for (double v : y.values()) {
    EXPECT_TRUE(v == 0.0 || std::abs(v - 1.25) < 1e-15);
    sum += v;
  }
  EXPECT_NEAR(sum / y.size(), 1.0, 0.03);
  EXPECT_THROW(t.Dropout(t.Leaf(ones, false), 1.0, rng), InvalidArgument);
}

TEST(TapeTest, GradientsAccumulateAcrossFanOut) {
  const Matrix<double> x = RandomMatrix(3, 2, 8);
  Tape<double> t;
  const NodeId nx = t.Leaf(x, true);
  // f = ||x + x||_F = 2 ||x||_F, so df/dx = 2 x / ||x||_F.
  t.Backward(t.FrobNorm(t.Add(nx, nx)));
  const double norm = FrobeniusNorm(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(t.grad(nx)->data()[i], 2.0 * x.data()[i] / norm, 1e-14);
  }
}

TEST(TapeTest, ShapeErrorsAreReported) {
  Tape<double> t;
  const NodeId a = t.Leaf(Matrix<double>(2, 3), false);
  const NodeId b = t.Leaf(Matrix<double>(2, 2), false);
  EXPECT_THROW(t.MatMul(a, b), InvalidArgument);
  EXPECT_THROW(t.Add(a, b), InvalidArgument);
  EXPECT_THROW(t.SubIdentity(a), InvalidArgument);
  EXPECT_THROW(t.Backward(a), InvalidArgument);  // not a scalar
}

TEST(TapeTest, ConstantLeavesGetNoGradient) {
  Tape<double> t;
  const NodeId a = t.Leaf(RandomMatrix(2, 2, 9), false);
  const NodeId b = t.Leaf(RandomMatrix(2, 2, 10), true);
  t.Backward(t.MseMean(a, b));
  EXPECT_EQ(t.grad(a), nullptr);
  EXPECT_NE(t.grad(b), nullptr);
}

TEST(TapeTest, BufferBytesCountsValuesAndGradients) {
  Tape<float> t;
  const NodeId x = t.Leaf(RandomMatrix<float>(10, 4, 11), true);
  const NodeId g = t.GramCols(x);
  EXPECT_EQ(t.BufferBytes(OpKind::kGramCols), 4u * 4u * sizeof(float));
  t.Backward(t.FrobNorm(t.SubIdentity(g)));
  EXPECT_EQ(t.BufferBytes(OpKind::kGramCols), 2u * 4u * 4u * sizeof(float));
  EXPECT_EQ(t.CountOps(OpKind::kGramCols), 1u);
  EXPECT_EQ(t.CountOps(OpKind::kGramRows), 0u);
}

TEST(GradCheckTest, SuitePassesOnFiveSeeds) {
  const auto report = RunGradCheckSuite();
  std::size_t ops = 0;
  for (const OpCheck& r : report) {
    EXPECT_TRUE(r.passed) << r.name << " max rel error " << r.max_rel_error;
    EXPECT_LE(r.max_rel_error, 1e-4) << r.name;
    EXPECT_GT(r.checked, 0u) << r.name;
    ops += r.name.rfind("end_to_end", 0) != 0;
  }
  EXPECT_EQ(ops, kNumOpKinds - 1);
}

// Each corrupted backward rule must be caught by its own check.
class CorruptedBackwardTest : public ::testing::TestWithParam<OpKind> {};

TEST_P(CorruptedBackwardTest, IsDetected) {
  GradCheckSuiteConfig config;
  config.seeds = {0};
  config.tape.corrupt_backward = GetParam();
  const auto report = RunGradCheckSuite(config);
  const std::string name(OpName(GetParam()));
  bool found = false;
  for (const OpCheck& r : report) {
    if (r.name == name) {
      found = true;
      EXPECT_FALSE(r.passed) << name;
      EXPECT_GT(r.max_rel_error, 1e-2);
    }
  }
  EXPECT_TRUE(found) << name;
}

INSTANTIATE_TEST_SUITE_P(
    AllOps, CorruptedBackwardTest,
    ::testing::Values(OpKind::kMatMul, OpKind::kSpMM, OpKind::kAdd, OpKind::kAddBias,
                      OpKind::kRelu, OpKind::kDropout, OpKind::kRowL2Normalize,
                      OpKind::kMseMean, OpKind::kGramRows, OpKind::kGramCols,
                      OpKind::kSubIdentity, OpKind::kFrobNorm, OpKind::kScale,
                      OpKind::kMeanPair),
    [](const ::testing::TestParamInfo<OpKind>& info) {
      std::string s(OpName(info.param));
      s.erase(std::remove(s.begin(), s.end(), '_'), s.end());
      return s;
    });

TEST(GradCheckTest, SkipsCoordinatesThatCrossAKink) {
  // x = [eps/2]: the +eps perturbation stays positive, -eps crosses zero.
  const Matrix<double> x = Matrix<double>::FromRows({{0.5e-5, 1.0}});
  const GraphBuilder build = [](Tape<double>& t, std::span<const NodeId> in) {
    return t.FrobNorm(t.Relu(in[0]));
  };
  const GradCheckResult r = GradCheck(build, std::span<const Matrix<double>>(&x, 1));
  EXPECT_EQ(r.skipped.size(), 1u);
  EXPECT_EQ(r.checked, 1u);
  EXPECT_LE(r.max_rel_error, 1e-6);
}

TEST(MemoryTest, TracksMatrixAllocations) {
  ResetPeakAllocation();
  const std::int64_t base = CurrentAllocatedBytes();
  {
    Matrix<float> m(100, 10);
    EXPECT_EQ(CurrentAllocatedBytes() - base, 4000);
  }
  EXPECT_EQ(CurrentAllocatedBytes(), base);
  EXPECT_GE(PeakAllocatedBytes() - base, 4000);
  ResetPeakAllocation();
  EXPECT_EQ(PeakAllocatedBytes(), CurrentAllocatedBytes());
}

}  // namespace
}  // namespace surgeon
