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

#include "surgeon/probe.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <spdlog/spdlog.h>

#include "surgeon/error.h"
#include "surgeon/rng.h"

namespace surgeon {

std::string_view TaskKindName(TaskKind kind) {
  switch (kind) {
    case TaskKind::kBinary:
      return "BC";
    case TaskKind::kMultiClass:
      return "MCC";
    case TaskKind::kMultiLabel:
      return "MLC";
  }
  return "?";
}

std::optional<TaskKind> ParseTaskKind(std::string_view s) {
  if (s == "BC") return TaskKind::kBinary;
  if (s == "MCC") return TaskKind::kMultiClass;
  if (s == "MLC") return TaskKind::kMultiLabel;
  return std::nullopt;
}

void LabelSet::Validate() const {
  if (num_classes == 0) throw InvalidArgument("labels: zero classes");
  if (task == TaskKind::kBinary && num_classes != 2) {
    throw InvalidArgument("labels: binary task needs exactly 2 classes");
  }
  if (task == TaskKind::kMultiLabel) {
    if (multi.size() % num_classes != 0) {
      throw InvalidArgument("labels: multi-label table is not N x C");
    }
    for (std::uint8_t f : multi) {
      if (f > 1) throw InvalidArgument("labels: multi-label flags must be 0/1");
    }
    return;
  }
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] < 0 || static_cast<std::size_t>(classes[i]) >= num_classes) {
      throw InvalidArgument("labels: node " + std::to_string(i) + " has class " +
                            std::to_string(classes[i]) + " outside [0, " +
                            std::to_string(num_classes) + ")");
    }
  }
}

namespace {

void CheckRows(const Matrix<double>& embeddings, const LabelSet& labels,
               std::span<const NodeIndex> rows, const char* what) {
  if (embeddings.rows() != labels.num_nodes()) {
    throw InvalidArgument(std::string(what) + ": " +
                          std::to_string(embeddings.rows()) +
                          " embedding rows but " +
                          std::to_string(labels.num_nodes()) + " labels");
  }
  if (rows.empty()) throw InvalidArgument(std::string(what) + ": empty mask");
  for (NodeIndex r : rows) {
    if (r < 0 || static_cast<std::size_t>(r) >= embeddings.rows()) {
      throw InvalidArgument(std::string(what) + ": mask row " +
                            std::to_string(r) + " out of range");
    }
  }
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Matrix<double> ProbeLogits(const ProbeModel& probe,
                           const Matrix<double>& embeddings,
                           std::span<const NodeIndex> rows) {
  Matrix<double> logits =
      MatMul(GatherRows(embeddings, rows), probe.weights);
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    for (std::size_t c = 0; c < logits.cols(); ++c) logits(r, c) += probe.bias(0, c);
  }
  return logits;
}

ProbeModel FitProbe(const Matrix<double>& embeddings, const LabelSet& labels,
                    std::span<const NodeIndex> train, const ProbeConfig& config) {
  CheckRows(embeddings, labels, train, "fit_probe");
  labels.Validate();
  if (config.epochs < 0 || !(config.lr > 0.0)) {
    throw InvalidArgument("fit_probe: epochs must be >= 0 and lr > 0");
  }
  const std::size_t c = labels.num_classes;
  const std::size_t n = train.size();

  Matrix<double> targets(n, c);
  for (std::size_t i = 0; i < n; ++i) {
    const auto node = static_cast<std::size_t>(train[i]);
    if (labels.task == TaskKind::kMultiLabel) {
      for (std::size_t k = 0; k < c; ++k) targets(i, k) = labels.Has(node, k) ? 1.0 : 0.0;
    } else {
      targets(i, static_cast<std::size_t>(labels.classes[node])) = 1.0;
    }
  }
  if (labels.task != TaskKind::kMultiLabel) {
    for (std::size_t k = 0; k < c; ++k) {
      bool seen = false;
      for (std::size_t i = 0; i < n && !seen; ++i) seen = targets(i, k) > 0.0;
      if (!seen) spdlog::warn("fit_probe: class {} absent from the train split", k);
    }
  }

  const Matrix<double> x = GatherRows(embeddings, train);
  ProbeModel probe{Matrix<double>(embeddings.cols(), c), Matrix<double>(1, c)};
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Matrix<double> g = MatMul(x, probe.weights);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = g.row(i);
      for (std::size_t k = 0; k < c; ++k) row[k] += probe.bias(0, k);
      if (labels.task == TaskKind::kMultiClass) {
        const double mx = *std::max_element(row.begin(), row.end());
        double z = 0.0;
        for (double& v : row) {
          v = std::exp(v - mx);
          z += v;
        }
        for (std::size_t k = 0; k < c; ++k) {
          row[k] = (row[k] / z - targets(i, k)) * inv_n;
        }
      } else {
        for (std::size_t k = 0; k < c; ++k) {
          row[k] = (Sigmoid(row[k]) - targets(i, k)) * inv_n;
        }
      }
    }
    const Matrix<double> dw = MatMulTransA(x, g);
    for (std::size_t k = 0; k < dw.size(); ++k) {
      probe.weights.data()[k] -= config.lr * dw.data()[k];
    }
    for (std::size_t k = 0; k < c; ++k) {
      double db = 0.0;
      for (std::size_t i = 0; i < n; ++i) db += g(i, k);
      probe.bias(0, k) -= config.lr * db;
    }
  }
  return probe;
}

std::size_t ArgMax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < row.size(); ++k) {
    if (row[k] > row[best]) best = k;
  }
  return best;
}

double RocAuc(std::span<const double> scores,
              std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw InvalidArgument("roc_auc: score/label length mismatch");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  double positives = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    // Ranks i+1..j share their average.
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] != 0) {
        positives += 1.0;
        rank_sum += avg_rank;
      }
    }
    i = j;
  }
  const double negatives = static_cast<double>(scores.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

Metrics Evaluate(const ProbeModel& probe, const Matrix<double>& embeddings,
                 const LabelSet& labels, std::span<const NodeIndex> mask) {
  CheckRows(embeddings, labels, mask, "evaluate");
  const Matrix<double> logits = ProbeLogits(probe, embeddings, mask);
  Metrics m;
  if (labels.task != TaskKind::kMultiLabel) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      const auto want = labels.classes[static_cast<std::size_t>(mask[i])];
      if (ArgMax(logits.row(i)) == static_cast<std::size_t>(want)) ++correct;
    }
    m.name = "accuracy";
    m.value = static_cast<double>(correct) / static_cast<double>(mask.size());
    return m;
  }

  const std::size_t c = labels.num_classes;
  std::vector<double> all_scores;
  std::vector<std::uint8_t> all_labels;
  all_scores.reserve(mask.size() * c);
  all_labels.reserve(mask.size() * c);
  m.per_class.resize(c);
  std::vector<double> scores(mask.size());
  std::vector<std::uint8_t> flags(mask.size());
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t i = 0; i < mask.size(); ++i) {
      scores[i] = logits(i, k);
      flags[i] = labels.Has(static_cast<std::size_t>(mask[i]), k) ? 1 : 0;
      all_scores.push_back(scores[i]);
      all_labels.push_back(flags[i]);
    }
    m.per_class[k] = RocAuc(scores, flags);
  }
  m.name = "roc_auc";
  m.value = RocAuc(all_scores, all_labels);
  return m;
}

double StableRank(const Matrix<double>& z) {
  const Matrix<double> gram = MatMulTransA(z, z);
  const std::size_t f = gram.rows();
  double trace = 0.0;
  for (std::size_t i = 0; i < f; ++i) trace += gram(i, i);
  if (trace <= 0.0) return 0.0;

  Rng rng = MakeRng(0x5eed);
  std::normal_distribution<double> normal;
  std::vector<double> v(f);
  std::vector<double> w(f);
  for (double& x : v) x = normal(rng);
  double lambda = 0.0;
  for (int it = 0; it < 5000; ++it) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    for (double& x : v) x /= norm;
    for (std::size_t i = 0; i < f; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < f; ++j) s += gram(i, j) * v[j];
      w[i] = s;
    }
    double next = 0.0;
    for (std::size_t i = 0; i < f; ++i) next += v[i] * w[i];
    const bool converged = std::abs(next - lambda) <= 1e-13 * std::abs(next);
    lambda = next;
    v.swap(w);
    if (converged) break;
  }
  return lambda > 0.0 ? trace / lambda : 0.0;
}

}  // namespace surgeon
