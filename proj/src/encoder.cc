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

#include "surgeon/encoder.h"

#include "surgeon/augmenter.h"
#include "surgeon/error.h"

namespace surgeon {

template <typename T>
EncoderParams<T> InitEncoder(std::span<const std::size_t> dims, double dropout,
                             bool residual, bool use_bias, Rng& rng) {
  if (dims.size() < 2) throw InvalidArgument("encoder: need at least one layer");
  EncoderParams<T> p;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    if (dims[l] == 0 || dims[l + 1] == 0) {
      throw InvalidArgument("encoder: layer widths must be positive");
    }
    p.weights.push_back(GlorotUniform<T>(dims[l], dims[l + 1], rng));
    if (use_bias) p.biases.emplace_back(1, dims[l + 1]);
  }
  p.dropout = dropout;
  p.residual = residual;
  p.use_bias = use_bias;
  return p;
}

template <typename T>
std::vector<LayerOperator<T>> FullBatchOperators(const NormalizedAdjacency& adj,
                                                 std::size_t num_layers) {
  auto shared = std::make_shared<const CsrMatrix<T>>(adj.matrix().Cast<T>());
  return std::vector<LayerOperator<T>>(num_layers, LayerOperator<T>{shared, nullptr});
}

template <typename T>
std::vector<LayerOperator<T>> BlockOperators(const SampledBlock& block) {
  std::vector<LayerOperator<T>> ops;
  ops.reserve(block.layers.size());
  for (const SampledLayer& layer : block.layers) {
    LayerOperator<T> op;
    op.propagate =
        std::make_shared<const CsrMatrix<T>>(layer.propagate.Cast<T>());
    auto select = std::make_shared<CsrMatrix<T>>();
    select->rows = layer.targets.size();
    select->cols = layer.sources.size();
    select->row_offsets.resize(select->rows + 1);
    for (std::size_t i = 0; i < select->rows; ++i) {
      select->col_indices.push_back(static_cast<NodeIndex>(i));
      select->values.push_back(T(1));
      select->row_offsets[i + 1] = static_cast<NodeIndex>(i + 1);
    }
    op.residual_select = std::move(select);
    ops.push_back(std::move(op));
  }
  return ops;
}

template <typename T>
EncoderHandles RegisterEncoder(Tape<T>& tape, const EncoderParams<T>& params,
                               bool requires_grad) {
  EncoderHandles h;
  for (const auto& w : params.weights) h.weights.push_back(tape.Leaf(w, requires_grad));
  if (params.use_bias) {
    for (const auto& b : params.biases) h.biases.push_back(tape.Leaf(b, requires_grad));
  }
  h.dropout = params.dropout;
  h.residual = params.residual;
  h.use_bias = params.use_bias;
  return h;
}

template <typename T>
NodeId Encode(Tape<T>& tape, std::span<const LayerOperator<T>> layers,
              NodeId h0, const EncoderHandles& params, bool train, Rng& rng) {
  const std::size_t depth = params.weights.size();
  if (layers.size() != depth) {
    throw InvalidArgument("encode: " + std::to_string(layers.size()) +
                          " propagation layers for a " + std::to_string(depth) +
                          "-layer encoder");
  }
  if (tape.value(h0).cols() != tape.value(params.weights.front()).rows()) {
    throw InvalidArgument("encode: input " + tape.value(h0).ShapeString() +
                          " vs first layer " +
                          tape.value(params.weights.front()).ShapeString());
  }
  NodeId h = h0;
  for (std::size_t l = 0; l < depth; ++l) {
    const LayerOperator<T>& op = layers[l];
    if (op.propagate->cols != tape.value(h).rows()) {
      throw InvalidArgument("encode: layer " + std::to_string(l) +
                            " propagates " + std::to_string(op.propagate->cols) +
                            " sources but input has " +
                            std::to_string(tape.value(h).rows()) + " rows");
    }
    const bool last = l + 1 == depth;
    NodeId out = tape.SpMM(op.propagate, tape.MatMul(h, params.weights[l]));
    if (params.use_bias) out = tape.AddBias(out, params.biases[l]);
    if (!last) {
      out = tape.Relu(out);
      if (train && params.dropout > 0.0) out = tape.Dropout(out, params.dropout, rng);
    }
    if (params.residual && tape.value(h).cols() == tape.value(out).cols()) {
      const NodeId skip =
          op.residual_select ? tape.SpMM(op.residual_select, h) : h;
      out = tape.Add(out, skip);
    }
    h = out;
  }
  return h;
}

template <typename T>
Matrix<T> EncodeEval(const NormalizedAdjacency& adj, const Matrix<T>& h0,
                     const EncoderParams<T>& params) {
  Tape<T> tape;
  Rng unused(0);
  const auto ops = FullBatchOperators<T>(adj, params.num_layers());
  const auto handles = RegisterEncoder(tape, params, false);
  const NodeId x = tape.Leaf(h0, false);
  return tape.value(Encode<T>(tape, ops, x, handles, false, unused));
}

#define SURGEON_INSTANTIATE_ENCODER(T)                                         \
  template EncoderParams<T> InitEncoder<T>(std::span<const std::size_t>,      \
                                           double, bool, bool, Rng&);          \
  template std::vector<LayerOperator<T>> FullBatchOperators<T>(               \
      const NormalizedAdjacency&, std::size_t);                                \
  template std::vector<LayerOperator<T>> BlockOperators<T>(const SampledBlock&); \
  template EncoderHandles RegisterEncoder<T>(Tape<T>&, const EncoderParams<T>&, \
                                             bool);                            \
  template NodeId Encode<T>(Tape<T>&, std::span<const LayerOperator<T>>,      \
                            NodeId, const EncoderHandles&, bool, Rng&);        \
  template Matrix<T> EncodeEval<T>(const NormalizedAdjacency&, const Matrix<T>&, \
                                   const EncoderParams<T>&);

SURGEON_INSTANTIATE_ENCODER(float)
SURGEON_INSTANTIATE_ENCODER(double)

}  // namespace surgeon
