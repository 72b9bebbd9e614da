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

#ifndef SURGEON_ENCODER_H_
#define SURGEON_ENCODER_H_

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "surgeon/graph.h"
#include "surgeon/matrix.h"
#include "surgeon/rng.h"
#include "surgeon/tape.h"

namespace surgeon {

// L-layer GCN: H' = ReLU(A_hat H W + b) on hidden layers, linear on the last.
template <typename T>
struct EncoderParams {
  std::vector<Matrix<T>> weights;  // F_{l-1} x F_l
  std::vector<Matrix<T>> biases;   // 1 x F_l, empty when use_bias is false
  double dropout = 0.2;
  bool residual = true;
  bool use_bias = true;

  std::size_t num_layers() const { return weights.size(); }
  std::size_t in_dim() const { return weights.front().rows(); }
  std::size_t out_dim() const { return weights.back().cols(); }
};

// dims = {F_0, F_1, ..., F_L}; requires L >= 1.
template <typename T>
EncoderParams<T> InitEncoder(std::span<const std::size_t> dims, double dropout,
                             bool residual, bool use_bias, Rng& rng);

// Propagation for one layer. For full-batch training every layer shares the
// normalized adjacency; for sampled blocks each layer has its own bipartite
// matrix and `residual_select` picks the target rows out of the layer input
// (null means the input rows already are the targets).
template <typename T>
struct LayerOperator {
  std::shared_ptr<const CsrMatrix<T>> propagate;
  std::shared_ptr<const CsrMatrix<T>> residual_select;
};

template <typename T>
std::vector<LayerOperator<T>> FullBatchOperators(const NormalizedAdjacency& adj,
                                                 std::size_t num_layers);

template <typename T>
std::vector<LayerOperator<T>> BlockOperators(const SampledBlock& block);

struct EncoderHandles {
  std::vector<NodeId> weights;
  std::vector<NodeId> biases;
  double dropout = 0.0;
  bool residual = true;
  bool use_bias = true;
};

template <typename T>
EncoderHandles RegisterEncoder(Tape<T>& tape, const EncoderParams<T>& params,
                               bool requires_grad = true);

// Records the encoder forward pass. Dropout follows the activation of hidden
// layers in train mode; a residual is added whenever a layer keeps its
// width.
template <typename T>
NodeId Encode(Tape<T>& tape, std::span<const LayerOperator<T>> layers,
              NodeId h0, const EncoderHandles& params, bool train, Rng& rng);

// Eval-mode full-batch convenience.
template <typename T>
Matrix<T> EncodeEval(const NormalizedAdjacency& adj, const Matrix<T>& h0,
                     const EncoderParams<T>& params);

}  // namespace surgeon

#endif  // SURGEON_ENCODER_H_
