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

#ifndef SURGEON_FILEIO_H_
#define SURGEON_FILEIO_H_

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "surgeon/error.h"

namespace surgeon {

// Writes to a sibling temp file then renames over `path`, so readers never
// observe a half-written file.
void WriteFileAtomic(const std::string& path, std::string_view contents);

std::string ReadFileBytes(const std::string& path);

// Little-endian encoder for the binary formats.
class ByteWriter {
 public:
  void Raw(std::string_view bytes) { out_.append(bytes); }
  void U32(std::uint32_t v) { Put(v); }
  void U64(std::uint64_t v) { Put(v); }
  void F32(float v) { Put(std::bit_cast<std::uint32_t>(v)); }
  const std::string& bytes() const { return out_; }

 private:
  template <typename U>
  void Put(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
  }
  std::string out_;
};

// Bounds-checked little-endian decoder. Every read past the end throws
// IoError naming `what`.
class ByteReader {
 public:
  ByteReader(std::string_view data, std::string what)
      : data_(data), what_(std::move(what)) {}

  std::string_view Raw(std::size_t n) {
    Need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t U32() { return Get<std::uint32_t>(); }
  std::uint64_t U64() { return Get<std::uint64_t>(); }
  float F32() { return std::bit_cast<float>(Get<std::uint32_t>()); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void Need(std::size_t n) const {
    if (data_.size() - pos_ < n) {
      throw IoError(what_ + ": truncated (needed " + std::to_string(n) +
                    " more bytes at offset " + std::to_string(pos_) + ")");
    }
  }
  template <typename U>
  U Get() {
    Need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }

  std::string_view data_;
  std::string what_;
  std::size_t pos_ = 0;
};

}  // namespace surgeon

#endif  // SURGEON_FILEIO_H_
