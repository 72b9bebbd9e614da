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

#ifndef SURGEON_MATRIX_H_
#define SURGEON_MATRIX_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "surgeon/error.h"
#include "surgeon/memory.h"

namespace surgeon {

// Dense row-major matrix. Storage goes through TrackedAllocator so peak
// buffer usage can be measured.
template <typename T>
class Matrix {
 public:
  using value_type = T;
  using Storage = std::vector<T, TrackedAllocator<T>>;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  // Row-wise literal, e.g. Matrix<double>::FromRows({{1, 2}, {3, 4}}).
  static Matrix FromRows(std::initializer_list<std::initializer_list<T>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != c) throw InvalidArgument("FromRows: ragged rows");
      std::copy(row.begin(), row.end(), m.data_.begin() + i * c);
      ++i;
    }
    return m;
  }

  static Matrix Identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  std::size_t bytes() const { return data_.size() * sizeof(T); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return {data_.data(), data_.size()}; }
  std::span<const T> values() const { return {data_.data(), data_.size()}; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  void Fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool SameShape(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  std::string ShapeString() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

  template <typename U>
  Matrix<U> Cast() const {
    Matrix<U> out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) {
      out.data()[i] = static_cast<U>(data_[i]);
    }
    return out;
  }

  bool AllFinite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](T v) { return std::isfinite(v); });
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Storage data_;
};

// C = A * B
template <typename T>
Matrix<T> MatMul(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) {
    throw InvalidArgument("matmul: shape mismatch " + a.ShapeString() + " * " +
                          b.ShapeString());
  }
  Matrix<T> c(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    T* out = c.data() + i * n;
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      if (aik == T(0)) continue;
      const T* brow = b.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) out[j] += aik * brow[j];
    }
  }
  return c;
}

// C = A^T * B
template <typename T>
Matrix<T> MatMulTransA(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows()) {
    throw InvalidArgument("matmul_ta: shape mismatch " + a.ShapeString() +
                          "^T * " + b.ShapeString());
  }
  Matrix<T> c(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const T* brow = b.data() + k * n;
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const T aki = a(k, i);
      if (aki == T(0)) continue;
      T* out = c.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) out[j] += aki * brow[j];
    }
  }
  return c;
}

// C = A * B^T
template <typename T>
Matrix<T> MatMulTransB(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.cols()) {
    throw InvalidArgument("matmul_tb: shape mismatch " + a.ShapeString() +
                          " * " + b.ShapeString() + "^T");
  }
  Matrix<T> c(a.rows(), b.rows());
  const std::size_t k = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const T* arow = a.data() + i * k;
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const T* brow = b.data() + j * k;
      T acc = T(0);
      for (std::size_t t = 0; t < k; ++t) acc += arow[t] * brow[t];
      c(i, j) = acc;
    }
  }
  return c;
}

template <typename T>
double FrobeniusNorm(const Matrix<T>& m) {
  double s = 0.0;
  for (T v : m.values()) s += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(s);
}

// Rows selected by index, in the given order.
template <typename T, typename Index>
Matrix<T> GatherRows(const Matrix<T>& m, std::span<const Index> rows) {
  Matrix<T> out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = m.row(static_cast<std::size_t>(rows[i]));
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace surgeon

#endif  // SURGEON_MATRIX_H_
