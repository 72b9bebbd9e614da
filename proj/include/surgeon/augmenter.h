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

#ifndef SURGEON_AUGMENTER_H_
#define SURGEON_AUGMENTER_H_

#include <cstddef>
#include <utility>

#include "surgeon/matrix.h"
#include "surgeon/rng.h"
#include "surgeon/tape.h"

namespace surgeon {

// Two independent linear heads f1, f2 producing the two views of a signal.
// Biases are stored as 1 x out_dim rows.
template <typename T>
struct AugmenterParams {
  Matrix<T> w1;
  Matrix<T> b1;
  Matrix<T> w2;
  Matrix<T> b2;
  double dropout = 0.2;
  bool use_bias = true;

  std::size_t in_dim() const { return w1.rows(); }
  std::size_t out_dim() const { return w1.cols(); }
};

// Glorot-uniform weights, zero biases. Each head draws from its own stream
// so the two views differ at initialization.
template <typename T>
AugmenterParams<T> InitAugmenter(std::size_t in_dim, std::size_t out_dim,
                                 double dropout, bool use_bias,
                                 Rng& head1_rng, Rng& head2_rng);

struct AugmenterHandles {
  NodeId w1, b1, w2, b2;
  double dropout = 0.0;
  bool use_bias = true;
};

template <typename T>
AugmenterHandles RegisterAugmenter(Tape<T>& tape,
                                   const AugmenterParams<T>& params,
                                   bool requires_grad = true);

struct ViewPair {
  NodeId first;
  NodeId second;
};

// view_i = dropout(input W_i + b_i). Dropout runs only in train mode, with
// masks drawn from `rng` separately per head.
template <typename T>
ViewPair AugmentPair(Tape<T>& tape, NodeId input, const AugmenterHandles& heads,
                     bool train, Rng& rng);

// Eval-mode convenience without a caller-visible tape.
template <typename T>
std::pair<Matrix<T>, Matrix<T>> AugmentPairEval(const Matrix<T>& input,
                                                const AugmenterParams<T>& params);

template <typename T>
Matrix<T> GlorotUniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace surgeon

#endif  // SURGEON_AUGMENTER_H_
