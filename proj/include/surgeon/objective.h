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

#ifndef SURGEON_OBJECTIVE_H_
#define SURGEON_OBJECTIVE_H_

#include <optional>
#include <string>
#include <string_view>

#include "surgeon/tape.h"

namespace surgeon {

enum class ConstraintMode { kRow, kColumn };
enum class Reduction { kMean, kSum };

std::string_view ConstraintModeName(ConstraintMode mode);
std::optional<ConstraintMode> ParseConstraintMode(std::string_view s);
std::string_view ReductionName(Reduction r);
std::optional<Reduction> ParseReduction(std::string_view s);

struct LossConfig {
  double gamma = 1.0;
  ConstraintMode constraint = ConstraintMode::kColumn;
  Reduction invariance = Reduction::kMean;

  void Validate() const;
};

// Rows scaled to unit L2 norm (zero rows stay zero).
template <typename T>
NodeId UnitRows(Tape<T>& tape, NodeId z);

// Squared distance between two unit-row matrices; kMean divides by the
// element count, kSum is the plain squared Frobenius norm.
template <typename T>
NodeId InvarianceTerm(Tape<T>& tape, NodeId z1, NodeId z2, Reduction reduction);

// ||Z Z^T - I_B||_F (row) or ||Z^T Z - I_F||_F (column), unsquared.
template <typename T>
NodeId ConstraintTerm(Tape<T>& tape, NodeId z, ConstraintMode mode);

struct LossNodes {
  NodeId total;
  NodeId invariance;
  NodeId constraint1;
  NodeId constraint2;
};

// invariance + gamma * (constraint(z1) + constraint(z2)).
template <typename T>
LossNodes TotalLoss(Tape<T>& tape, NodeId z1_unit, NodeId z2_unit,
                    const LossConfig& config);

}  // namespace surgeon

#endif  // SURGEON_OBJECTIVE_H_
