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

#ifndef SURGEON_TAPE_H_
#define SURGEON_TAPE_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "surgeon/graph.h"
#include "surgeon/matrix.h"
#include "surgeon/rng.h"

namespace surgeon {

// The fixed op vocabulary. Every forward op appends one node to the tape and
// has a hand-written backward rule.
enum class OpKind : std::uint8_t {
  kLeaf,
  kMatMul,
  kSpMM,  // constant sparse operand times dense input
  kAdd,
  kAddBias,  // adds a 1 x cols row vector to every row
  kRelu,
  kDropout,
  kRowL2Normalize,
  kMseMean,
  kGramRows,  // X X^T
  kGramCols,  // X^T X
  kSubIdentity,
  kFrobNorm,
  kScale,
  kMeanPair,
};

inline constexpr std::size_t kNumOpKinds = 15;

std::string_view OpName(OpKind kind);
std::optional<OpKind> OpFromName(std::string_view name);

struct NodeId {
  std::uint32_t index = 0;
  friend bool operator==(NodeId, NodeId) = default;
};

struct TapeOptions {
  // Test hook: multiplies the backward contribution of this op by 1.5 so the
  // gradient checker's self-test has something to catch.
  std::optional<OpKind> corrupt_backward;
};

template <typename T>
class Tape {
 public:
  explicit Tape(TapeOptions options = {}) : options_(options) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) noexcept = default;
  Tape& operator=(Tape&&) noexcept = default;

  NodeId Leaf(Matrix<T> value, bool requires_grad);

  NodeId MatMul(NodeId a, NodeId b);
  // No gradient flows into `s`; it is part of the graph topology.
  NodeId SpMM(std::shared_ptr<const CsrMatrix<T>> s, NodeId x);
  NodeId Add(NodeId a, NodeId b);
  NodeId AddBias(NodeId x, NodeId bias);
  NodeId Relu(NodeId x);
  // Inverted dropout: kept entries are scaled by 1/(1-p). p == 0 draws
  // nothing from `rng`.
  NodeId Dropout(NodeId x, double p, Rng& rng);
  // Each row divided by max(||row||_2, kNormClamp).
  NodeId RowL2Normalize(NodeId x);
  // sum((a-b)^2) / element count, as a 1x1 node.
  NodeId MseMean(NodeId a, NodeId b);
  NodeId GramRows(NodeId x);
  NodeId GramCols(NodeId x);
  NodeId SubIdentity(NodeId x);
  NodeId FrobNorm(NodeId x);
  NodeId Scale(NodeId x, double factor);
  NodeId MeanPair(NodeId a, NodeId b);

  const Matrix<T>& value(NodeId id) const { return node(id).value; }
  T scalar(NodeId id) const;
  // Null when the node does not require gradients or backward has not
  // reached it.
  const Matrix<T>* grad(NodeId id) const;
  bool requires_grad(NodeId id) const { return node(id).requires_grad; }
  OpKind kind(NodeId id) const { return node(id).kind; }

  // Reverse-mode sweep from a 1x1 loss. Gradients accumulate across fan-out.
  void Backward(NodeId loss);

  std::size_t size() const { return nodes_.size(); }
  std::size_t CountOps(OpKind kind) const;
  // Bytes held by forward values (and gradients, once backward ran) of all
  // nodes of one kind.
  std::size_t BufferBytes(OpKind kind) const;

  // Activation pattern used by the gradient checker to detect coordinates
  // whose perturbation crosses a non-differentiable point: one byte per ReLU
  // input sign, plus a flag per norm node whose input is within `radius`
  // of zero (bit 1 set).
  std::vector<std::uint8_t> KinkSignature(double radius) const;

  static constexpr double kNormClamp = 1e-12;

 private:
  struct Node {
    OpKind kind = OpKind::kLeaf;
    std::array<std::uint32_t, 2> inputs{};
    std::uint8_t num_inputs = 0;
    bool requires_grad = false;
    bool has_grad = false;
    double factor = 0.0;
    Matrix<T> value;
    Matrix<T> grad;
    // Dropout: scaled keep mask. RowL2Normalize: per-row clamped norms.
    Matrix<T> cache;
    std::shared_ptr<const CsrMatrix<T>> sparse;
  };

  const Node& node(NodeId id) const;
  NodeId Push(Node n);
  Node MakeNode(OpKind kind, std::initializer_list<NodeId> inputs) const;
  void Accumulate(std::uint32_t target, const Matrix<T>& contribution,
                  OpKind source);

  TapeOptions options_;
  std::vector<Node> nodes_;
};

extern template class Tape<float>;
extern template class Tape<double>;

struct GradCheckCoordinate {
  std::size_t input = 0;
  std::size_t row = 0;
  std::size_t col = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  GradCheckCoordinate worst;
  std::size_t checked = 0;
  std::vector<GradCheckCoordinate> skipped;
};

// Builds a scalar loss from leaves registered for `inputs` (in order). Must
// be a pure function of its arguments: any dropout RNG is created inside.
using GraphBuilder =
    std::function<NodeId(Tape<double>&, std::span<const NodeId> inputs)>;

// Central finite differences over every input coordinate. The relative error
// per coordinate is |g_a - g_fd| / max(1, |g_a|). Coordinates whose
// perturbation changes the tape's kink signature are skipped and reported.
GradCheckResult GradCheck(const GraphBuilder& build,
                          std::span<const Matrix<double>> inputs,
                          double epsilon = 1e-5, TapeOptions options = {});

}  // namespace surgeon

#endif  // SURGEON_TAPE_H_
