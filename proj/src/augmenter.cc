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

#include "surgeon/augmenter.h"

#include <cmath>
#include <random>

#include "surgeon/error.h"

namespace surgeon {

template <typename T>
Matrix<T> GlorotUniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(1, fan_in + fan_out)));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix<T> w(fan_in, fan_out);
  for (T& v : w.values()) v = static_cast<T>(dist(rng));
  return w;
}

template <typename T>
AugmenterParams<T> InitAugmenter(std::size_t in_dim, std::size_t out_dim,
                                 double dropout, bool use_bias,
                                 Rng& head1_rng, Rng& head2_rng) {
  if (in_dim == 0 || out_dim == 0) {
    throw InvalidArgument("augmenter: dimensions must be positive");
  }
  AugmenterParams<T> p;
  p.w1 = GlorotUniform<T>(in_dim, out_dim, head1_rng);
  p.w2 = GlorotUniform<T>(in_dim, out_dim, head2_rng);
  p.b1 = Matrix<T>(1, out_dim);
  p.b2 = Matrix<T>(1, out_dim);
  p.dropout = dropout;
  p.use_bias = use_bias;
  return p;
}

template <typename T>
AugmenterHandles RegisterAugmenter(Tape<T>& tape,
                                   const AugmenterParams<T>& params,
                                   bool requires_grad) {
  AugmenterHandles h;
  h.w1 = tape.Leaf(params.w1, requires_grad);
  h.w2 = tape.Leaf(params.w2, requires_grad);
  h.use_bias = params.use_bias;
  if (params.use_bias) {
    h.b1 = tape.Leaf(params.b1, requires_grad);
    h.b2 = tape.Leaf(params.b2, requires_grad);
  }
  h.dropout = params.dropout;
  return h;
}

template <typename T>
ViewPair AugmentPair(Tape<T>& tape, NodeId input, const AugmenterHandles& heads,
                     bool train, Rng& rng) {
  const auto& x = tape.value(input);
  const auto& w1 = tape.value(heads.w1);
  const auto& w2 = tape.value(heads.w2);
  if (x.cols() != w1.rows() || !w1.SameShape(w2)) {
    throw InvalidArgument("augment_pair: input " + x.ShapeString() +
                          " vs heads " + w1.ShapeString() + ", " +
                          w2.ShapeString());
  }
  auto head = [&](NodeId w, NodeId b) {
    NodeId v = tape.MatMul(input, w);
    if (heads.use_bias) v = tape.AddBias(v, b);
    if (train && heads.dropout > 0.0) v = tape.Dropout(v, heads.dropout, rng);
    return v;
  };
  ViewPair out;
  out.first = head(heads.w1, heads.b1);
  out.second = head(heads.w2, heads.b2);
  return out;
}

template <typename T>
std::pair<Matrix<T>, Matrix<T>> AugmentPairEval(const Matrix<T>& input,
                                                const AugmenterParams<T>& params) {
  Tape<T> tape;
  Rng unused(0);
  const NodeId x = tape.Leaf(input, false);
  const auto heads = RegisterAugmenter(tape, params, false);
  const ViewPair v = AugmentPair(tape, x, heads, false, unused);
  return {tape.value(v.first), tape.value(v.second)};
}

#define SURGEON_INSTANTIATE_AUGMENTER(T)                                     \
  template Matrix<T> GlorotUniform<T>(std::size_t, std::size_t, Rng&);      \
  template AugmenterParams<T> InitAugmenter<T>(std::size_t, std::size_t,    \
                                               double, bool, Rng&, Rng&);   \
  template AugmenterHandles RegisterAugmenter<T>(                           \
      Tape<T>&, const AugmenterParams<T>&, bool);                            \
  template ViewPair AugmentPair<T>(Tape<T>&, NodeId, const AugmenterHandles&, \
                                   bool, Rng&);                              \
  template std::pair<Matrix<T>, Matrix<T>> AugmentPairEval<T>(              \
      const Matrix<T>&, const AugmenterParams<T>&);

SURGEON_INSTANTIATE_AUGMENTER(float)
SURGEON_INSTANTIATE_AUGMENTER(double)

}  // namespace surgeon
