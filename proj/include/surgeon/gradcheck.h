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

#ifndef SURGEON_GRADCHECK_H_
#define SURGEON_GRADCHECK_H_

#include <cstdint>
#include <string>
#include <vector>

#include "surgeon/tape.h"

namespace surgeon {

struct GradCheckSuiteConfig {
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  double epsilon = 1e-5;
  double tolerance = 1e-4;
  TapeOptions tape;
};

// Worst case of one named check across all seeds.
struct OpCheck {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  bool passed = false;
};

// One check per op in the vocabulary (each wrapped in a scalar reduction),
// followed by end-to-end loss graphs of a tiny model in both augmentation
// modes and both constraint flavors. Always runs in double precision.
std::vector<OpCheck> RunGradCheckSuite(const GradCheckSuiteConfig& config = {});

}  // namespace surgeon

#endif  // SURGEON_GRADCHECK_H_
