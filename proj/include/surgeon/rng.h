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

#ifndef SURGEON_RNG_H_
#define SURGEON_RNG_H_

#include <cstdint>
#include <random>

namespace surgeon {

// Every random draw in the engine goes through an explicitly owned Rng.
using Rng = std::mt19937_64;

// SplitMix64 finalizer; derives decorrelated child seeds from one run seed.
inline std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng MakeRng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(MixSeed(seed, stream));
}

}  // namespace surgeon

#endif  // SURGEON_RNG_H_
