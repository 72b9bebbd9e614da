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

#ifndef SURGEON_PROBE_H_
#define SURGEON_PROBE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "surgeon/graph.h"
#include "surgeon/matrix.h"

namespace surgeon {

enum class TaskKind { kBinary, kMultiClass, kMultiLabel };

// "BC", "MCC", "MLC".
std::string_view TaskKindName(TaskKind kind);
std::optional<TaskKind> ParseTaskKind(std::string_view s);

struct LabelSet {
  TaskKind task = TaskKind::kMultiClass;
  std::size_t num_classes = 0;
  // One class index per node (BC/MCC).
  std::vector<std::int32_t> classes;
  // N x C membership flags, row-major (MLC).
  std::vector<std::uint8_t> multi;

  std::size_t num_nodes() const {
    return task == TaskKind::kMultiLabel
               ? (num_classes == 0 ? 0 : multi.size() / num_classes)
               : classes.size();
  }
  bool Has(std::size_t node, std::size_t c) const {
    return multi[node * num_classes + c] != 0;
  }
  // Throws InvalidArgument on out-of-range classes or non-binary flags.
  void Validate() const;
};

struct ProbeConfig {
  int epochs = 100;
  double lr = 0.01;
};

// Logistic-regression head on frozen embeddings.
struct ProbeModel {
  Matrix<double> weights;  // F_emb x C
  Matrix<double> bias;     // 1 x C
};

// Full-batch gradient descent from zero weights on the rows in `train`:
// softmax cross-entropy for MCC, per-class sigmoid cross-entropy for BC and
// MLC (BC uses one-hot targets over its two classes).
ProbeModel FitProbe(const Matrix<double>& embeddings, const LabelSet& labels,
                    std::span<const NodeIndex> train,
                    const ProbeConfig& config = {});

Matrix<double> ProbeLogits(const ProbeModel& probe,
                           const Matrix<double>& embeddings,
                           std::span<const NodeIndex> rows);

struct Metrics {
  std::string name;  // "accuracy" or "roc_auc"
  double value = 0.0;
  // MLC only: per-class AUC, NaN where the class has one polarity in `mask`.
  std::vector<double> per_class;
};

// Accuracy (argmax, ties to the lowest class) for BC/MCC; micro-averaged
// ROC-AUC over all (node, class) pairs for MLC.
Metrics Evaluate(const ProbeModel& probe, const Matrix<double>& embeddings,
                 const LabelSet& labels, std::span<const NodeIndex> mask);

// Index of the row maximum, lowest index on ties.
std::size_t ArgMax(std::span<const double> row);

// Mann-Whitney estimate with average ranks for ties. NaN when one class is
// empty.
double RocAuc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// ||Z||_F^2 / ||Z||_2^2, the spectral norm found by power iteration on Z^T Z.
double StableRank(const Matrix<double>& z);

}  // namespace surgeon

#endif  // SURGEON_PROBE_H_
