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

#include "surgeon/memory.h"

#include <algorithm>

namespace surgeon {

AllocationStats& ThreadAllocationStats() {
  thread_local AllocationStats stats;
  return stats;
}

void ResetPeakAllocation() {
  auto& s = ThreadAllocationStats();
  s.peak_bytes = s.current_bytes;
}

std::int64_t PeakAllocatedBytes() { return ThreadAllocationStats().peak_bytes; }

std::int64_t CurrentAllocatedBytes() {
  return ThreadAllocationStats().current_bytes;
}

void RecordAllocation(std::size_t bytes) {
  auto& s = ThreadAllocationStats();
  s.current_bytes += static_cast<std::int64_t>(bytes);
  s.peak_bytes = std::max(s.peak_bytes, s.current_bytes);
  ++s.total_allocations;
}

void RecordDeallocation(std::size_t bytes) {
  ThreadAllocationStats().current_bytes -= static_cast<std::int64_t>(bytes);
}

}  // namespace surgeon
