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

#ifndef SURGEON_MEMORY_H_
#define SURGEON_MEMORY_H_

#include <cstddef>
#include <cstdint>
#include <new>

namespace surgeon {

// Accounting of engine-owned buffers (every Matrix allocation). Counters are
// per thread so concurrent runs on different threads do not interfere.
struct AllocationStats {
  std::int64_t current_bytes = 0;
  std::int64_t peak_bytes = 0;
  std::int64_t total_allocations = 0;
};

AllocationStats& ThreadAllocationStats();

// Sets the high-water mark back to the current live byte count.
void ResetPeakAllocation();
std::int64_t PeakAllocatedBytes();
std::int64_t CurrentAllocatedBytes();

void RecordAllocation(std::size_t bytes);
void RecordDeallocation(std::size_t bytes);

template <typename T>
class TrackedAllocator {
 public:
  using value_type = T;

  TrackedAllocator() noexcept = default;
  template <typename U>
  TrackedAllocator(const TrackedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    T* p = static_cast<T*>(::operator new(n * sizeof(T)));
    RecordAllocation(n * sizeof(T));
    return p;
  }

  void deallocate(T* p, std::size_t n) noexcept {
    RecordDeallocation(n * sizeof(T));
    ::operator delete(p);
  }

  template <typename U>
  bool operator==(const TrackedAllocator<U>&) const noexcept {
    return true;
  }
};

}  // namespace surgeon

#endif  // SURGEON_MEMORY_H_
