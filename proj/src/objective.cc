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

#include "surgeon/objective.h"

#include <cmath>

#include "surgeon/error.h"

namespace surgeon {

std::string_view ConstraintModeName(ConstraintMode mode) {
  return mode == ConstraintMode::kRow ? "row" : "column";
}

std::optional<ConstraintMode> ParseConstraintMode(std::string_view s) {
  if (s == "row") return ConstraintMode::kRow;
  if (s == "column" || s == "col") return ConstraintMode::kColumn;
  return std::nullopt;
}

std::string_view ReductionName(Reduction r) {
  return r == Reduction::kMean ? "mean" : "sum";
}

std::optional<Reduction> ParseReduction(std::string_view s) {
  if (s == "mean") return Reduction::kMean;
  if (s == "sum") return Reduction::kSum;
  return std::nullopt;
}

void LossConfig::Validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InvalidArgument("loss: gamma must be finite and >= 0, got " +
                          std::to_string(gamma));
  }
}

template <typename T>
NodeId UnitRows(Tape<T>& tape, NodeId z) {
  return tape.RowL2Normalize(z);
}

template <typename T>
NodeId InvarianceTerm(Tape<T>& tape, NodeId z1, NodeId z2, Reduction reduction) {
  const NodeId mse = tape.MseMean(z1, z2);
  if (reduction == Reduction::kMean) return mse;
  return tape.Scale(mse, static_cast<double>(tape.value(z1).size()));
}

template <typename T>
NodeId ConstraintTerm(Tape<T>& tape, NodeId z, ConstraintMode mode) {
  const NodeId gram =
      mode == ConstraintMode::kRow ? tape.GramRows(z) : tape.GramCols(z);
  return tape.FrobNorm(tape.SubIdentity(gram));
}

template <typename T>
LossNodes TotalLoss(Tape<T>& tape, NodeId z1_unit, NodeId z2_unit,
                    const LossConfig& config) {
  config.Validate();
  LossNodes out;
  out.invariance = InvarianceTerm(tape, z1_unit, z2_unit, config.invariance);
  out.constraint1 = ConstraintTerm(tape, z1_unit, config.constraint);
  out.constraint2 = ConstraintTerm(tape, z2_unit, config.constraint);
  const NodeId penalty =
      tape.Scale(tape.Add(out.constraint1, out.constraint2), config.gamma);
  out.total = tape.Add(out.invariance, penalty);
  return out;
}

#define SURGEON_INSTANTIATE_OBJECTIVE(T)                                  \
  template NodeId UnitRows<T>(Tape<T>&, NodeId);                          \
  template NodeId InvarianceTerm<T>(Tape<T>&, NodeId, NodeId, Reduction); \
  template NodeId ConstraintTerm<T>(Tape<T>&, NodeId, ConstraintMode);    \
  template LossNodes TotalLoss<T>(Tape<T>&, NodeId, NodeId, const LossConfig&);

SURGEON_INSTANTIATE_OBJECTIVE(float)
SURGEON_INSTANTIATE_OBJECTIVE(double)

}  // namespace surgeon
