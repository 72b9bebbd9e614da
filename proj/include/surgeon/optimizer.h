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

#ifndef SURGEON_OPTIMIZER_H_
#define SURGEON_OPTIMIZER_H_

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "surgeon/error.h"
#include "surgeon/matrix.h"

namespace surgeon {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Moment buffers mirror the parameter shapes
// and are created on the first step.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // A null gradient counts as zero for that tensor.
  void Step(std::span<Matrix<T>* const> params,
            std::span<const Matrix<T>* const> grads) {
    if (params.size() != grads.size()) {
      throw InvalidArgument("adam: parameter/gradient count mismatch");
    }
    if (first_.empty()) {
      for (const Matrix<T>* p : params) {
        first_.emplace_back(p->rows(), p->cols());
        second_.emplace_back(p->rows(), p->cols());
      }
    }
    if (first_.size() != params.size()) {
      throw InvalidArgument("adam: parameter set changed between steps");
    }
    ++step_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
    for (std::size_t t = 0; t < params.size(); ++t) {
      Matrix<T>& p = *params[t];
      Matrix<T>& m = first_[t];
      Matrix<T>& v = second_[t];
      if (!p.SameShape(m)) throw InvalidArgument("adam: parameter shape changed");
      const Matrix<T>* g = grads[t];
      if (g != nullptr && !g->SameShape(p)) {
        throw InvalidArgument("adam: gradient shape " + g->ShapeString() +
                              " vs parameter " + p.ShapeString());
      }
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = g ? static_cast<double>(g->data()[i]) : 0.0;
        const double mi = config_.beta1 * m.data()[i] + (1.0 - config_.beta1) * gi;
        const double vi =
            config_.beta2 * v.data()[i] + (1.0 - config_.beta2) * gi * gi;
        m.data()[i] = static_cast<T>(mi);
        v.data()[i] = static_cast<T>(vi);
        const double update =
            config_.lr * (mi / c1) / (std::sqrt(vi / c2) + config_.eps);
        p.data()[i] = static_cast<T>(p.data()[i] - update);
      }
    }
  }

  std::int64_t step_count() const { return step_; }
  const std::vector<Matrix<T>>& first_moments() const { return first_; }
  const std::vector<Matrix<T>>& second_moments() const { return second_; }

 private:
  AdamConfig config_;
  std::int64_t step_ = 0;
  std::vector<Matrix<T>> first_;
  std::vector<Matrix<T>> second_;
};

}  // namespace surgeon

#endif  // SURGEON_OPTIMIZER_H_
