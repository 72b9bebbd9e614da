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

#include "surgeon/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <random>

#include <fmt/format.h>

#include "surgeon/augmenter.h"
#include "surgeon/encoder.h"
#include "surgeon/graph.h"
#include "surgeon/objective.h"
#include "surgeon/trainer.h"

namespace surgeon {
namespace {

using Inputs = std::vector<Matrix<double>>;

struct Case {
  std::string name;
  Inputs inputs;
  GraphBuilder build;
};

Matrix<double> Gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> dist;
  Matrix<double> m(rows, cols);
  for (double& v : m.values()) v = dist(rng);
  return m;
}

// Reduces a non-scalar node to a scalar against a fixed random target so
// every output coordinate carries a distinct upstream gradient.
NodeId Reduce(Tape<double>& tape, NodeId y, const Matrix<double>& target) {
  return tape.MseMean(y, tape.Leaf(target, false));
}

std::vector<Case> OpCases(Rng& rng) {
  std::vector<Case> cases;
  auto unary = [&](std::string name, std::size_t r, std::size_t c,
                   std::function<NodeId(Tape<double>&, NodeId)> op) {
    Matrix<double> x = Gaussian(r, c, rng);
    Tape<double> probe;
    const Matrix<double> shape = probe.value(op(probe, probe.Leaf(x, false)));
    Matrix<double> target = Gaussian(shape.rows(), shape.cols(), rng);
    cases.push_back({std::move(name), {std::move(x)},
                     [op, target](Tape<double>& t, std::span<const NodeId> in) {
                       return Reduce(t, op(t, in[0]), target);
                     }});
  };
  auto binary = [&](std::string name, Matrix<double> a, Matrix<double> b,
                    std::function<NodeId(Tape<double>&, NodeId, NodeId)> op) {
    Tape<double> probe;
    const Matrix<double> shape =
        probe.value(op(probe, probe.Leaf(a, false), probe.Leaf(b, false)));
    Matrix<double> target = Gaussian(shape.rows(), shape.cols(), rng);
    cases.push_back({std::move(name), {std::move(a), std::move(b)},
                     [op, target](Tape<double>& t, std::span<const NodeId> in) {
                       return Reduce(t, op(t, in[0], in[1]), target);
                     }});
  };

  binary("matmul", Gaussian(4, 3, rng), Gaussian(3, 5, rng),
         [](Tape<double>& t, NodeId a, NodeId b) { return t.MatMul(a, b); });

  // Random sparse constant with an empty row to cover that edge.
  auto sparse = std::make_shared<CsrMatrix<double>>();
  sparse->rows = 5;
  sparse->cols = 4;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      if (r != 2 && (r + c) % 2 == 0) {
        sparse->col_indices.push_back(static_cast<NodeIndex>(c));
        sparse->values.push_back(unit(rng));
      }
    }
    sparse->row_offsets.push_back(static_cast<NodeIndex>(sparse->col_indices.size()));
  }
  std::shared_ptr<const CsrMatrix<double>> s = sparse;
  unary("spmm_const", 4, 3, [s](Tape<double>& t, NodeId x) { return t.SpMM(s, x); });

  binary("add", Gaussian(4, 3, rng), Gaussian(4, 3, rng),
         [](Tape<double>& t, NodeId a, NodeId b) { return t.Add(a, b); });
  binary("add_bias", Gaussian(4, 3, rng), Gaussian(1, 3, rng),
         [](Tape<double>& t, NodeId x, NodeId b) { return t.AddBias(x, b); });
  unary("relu", 5, 4, [](Tape<double>& t, NodeId x) { return t.Relu(x); });
  unary("dropout", 5, 4, [](Tape<double>& t, NodeId x) {
    Rng mask_rng = MakeRng(7, 0);
    return t.Dropout(x, 0.3, mask_rng);
  });
  unary("row_l2_normalize", 5, 4,
        [](Tape<double>& t, NodeId x) { return t.RowL2Normalize(x); });
  {
    // Scalar already; no reduction.
    cases.push_back({"mse_mean", {Gaussian(4, 3, rng), Gaussian(4, 3, rng)},
                     [](Tape<double>& t, std::span<const NodeId> in) {
                       return t.MseMean(in[0], in[1]);
                     }});
  }
  unary("gram_rows", 4, 3, [](Tape<double>& t, NodeId x) { return t.GramRows(x); });
  unary("gram_cols", 4, 3, [](Tape<double>& t, NodeId x) { return t.GramCols(x); });
  unary("sub_identity", 4, 4, [](Tape<double>& t, NodeId x) { return t.SubIdentity(x); });
  cases.push_back({"frob_norm", {Gaussian(4, 3, rng)},
                   [](Tape<double>& t, std::span<const NodeId> in) {
                     return t.FrobNorm(in[0]);
                   }});
  unary("scale", 4, 3, [](Tape<double>& t, NodeId x) { return t.Scale(x, -0.7); });
  binary("mean_pair", Gaussian(4, 3, rng), Gaussian(4, 3, rng),
         [](Tape<double>& t, NodeId a, NodeId b) { return t.MeanPair(a, b); });
  return cases;
}

// Tiny two-layer model on a 7-node graph; the inputs are every trainable
// tensor, features are constant.
Case EndToEnd(AugmentMode mode, ConstraintMode constraint, Reduction reduction,
              Rng& rng) {
  const std::vector<Edge> edges{{0, 1}, {1, 2}, {2, 3}, {3, 0}, {3, 4}, {4, 5}, {5, 6}, {6, 4}};
  const Graph g = Graph::Build(edges, 7);
  auto layers = std::make_shared<std::vector<LayerOperator<double>>>(
      FullBatchOperators<double>(NormalizeAdjacency(g), 2));
  const std::size_t f = 5, d = 4, fl = 3;
  const bool pre = mode == AugmentMode::kPre;
  const std::size_t aug_in = pre ? f : d;
  const std::size_t aug_out = pre ? d : fl;
  const std::vector<std::size_t> enc_dims =
      pre ? std::vector<std::size_t>{d, d, fl} : std::vector<std::size_t>{f, d, d};

  Matrix<double> x = Gaussian(7, f, rng);
  Inputs inputs{Gaussian(aug_in, aug_out, rng), Gaussian(1, aug_out, rng),
                Gaussian(aug_in, aug_out, rng), Gaussian(1, aug_out, rng)};
  for (std::size_t l = 0; l + 1 < enc_dims.size(); ++l) {
    inputs.push_back(Gaussian(enc_dims[l], enc_dims[l + 1], rng));
    inputs.push_back(Gaussian(1, enc_dims[l + 1], rng));
  }
  LossConfig loss{0.5, constraint, reduction};
  std::string name = fmt::format("end_to_end_{}_{}_{}", pre ? "pre" : "post",
                                 ConstraintModeName(constraint), ReductionName(reduction));
  return {std::move(name), std::move(inputs),
          [=](Tape<double>& t, std::span<const NodeId> in) {
            const NodeId xin = t.Leaf(x, false);
            AugmenterHandles aug{in[0], in[1], in[2], in[3], 0.2, true};
            EncoderHandles enc;
            enc.dropout = 0.2;
            for (std::size_t i = 4; i < in.size(); i += 2) {
              enc.weights.push_back(in[i]);
              enc.biases.push_back(in[i + 1]);
            }
            Rng drop = MakeRng(11, 0);
            NodeId z1, z2;
            if (pre) {
              const ViewPair v = AugmentPair(t, xin, aug, true, drop);
              z1 = Encode<double>(t, *layers, v.first, enc, true, drop);
              z2 = Encode<double>(t, *layers, v.second, enc, true, drop);
            } else {
              const NodeId z = Encode<double>(t, *layers, xin, enc, true, drop);
              const ViewPair v = AugmentPair(t, z, aug, true, drop);
              z1 = v.first;
              z2 = v.second;
            }
            return TotalLoss(t, UnitRows(t, z1), UnitRows(t, z2), loss).total;
          }};
}

}  // namespace

std::vector<OpCheck> RunGradCheckSuite(const GradCheckSuiteConfig& config) {
  std::vector<OpCheck> report;
  auto record = [&](const Case& c) {
    auto it = std::find_if(report.begin(), report.end(),
                           [&](const OpCheck& r) { return r.name == c.name; });
    if (it == report.end()) {
      report.push_back({c.name, 0.0, 0, 0, true});
      it = std::prev(report.end());
    }
    const GradCheckResult r = GradCheck(c.build, c.inputs, config.epsilon, config.tape);
    if (std::isnan(r.max_rel_error) || r.max_rel_error > it->max_rel_error) {
      it->max_rel_error = r.max_rel_error;
    }
    it->checked += r.checked;
    it->skipped += r.skipped.size();
    it->passed = it->passed && r.checked > 0 && r.max_rel_error <= config.tolerance;
  };
  for (std::uint64_t seed : config.seeds) {
    Rng rng = MakeRng(seed, 30);
    for (const Case& c : OpCases(rng)) record(c);
    for (AugmentMode mode : {AugmentMode::kPre, AugmentMode::kPost}) {
      for (ConstraintMode cm : {ConstraintMode::kRow, ConstraintMode::kColumn}) {
        record(EndToEnd(mode, cm, Reduction::kSum, rng));
      }
    }
    record(EndToEnd(AugmentMode::kPre, ConstraintMode::kColumn, Reduction::kMean, rng));
  }
  return report;
}

}  // namespace surgeon
