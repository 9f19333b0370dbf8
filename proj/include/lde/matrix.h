// lde/matrix.h

// Copyright 2026  The ldelid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef LDE_MATRIX_H_
#define LDE_MATRIX_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace lde {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles with explicit shape. No broadcasting:
// every binary op checks shapes and throws DimensionError on mismatch.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t NumRows() const { return rows_; }
  std::size_t NumCols() const { return cols_; }
  std::size_t Size() const { return data_.size(); }
  bool Empty() const { return data_.empty(); }

  double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> Row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> Row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> Data() { return data_; }
  std::span<const double> Data() const { return data_; }
  const std::vector<double> &Storage() const { return data_; }

  Vector Col(std::size_t c) const;
  void SetCol(std::size_t c, std::span<const double> v);

  void SetZero();
  void Fill(double value);
  bool SameShape(const Matrix &other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  // Exact (bitwise on values) equality of shape and contents.
  bool operator==(const Matrix &other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix MatMul(const Matrix &a, const Matrix &b);
Matrix Transpose(const Matrix &m);

/// y += alpha * x, shapes must agree.
void AddScaled(Matrix *y, double alpha, const Matrix &x);
Matrix Add(const Matrix &a, const Matrix &b);
Matrix Scale(const Matrix &m, double alpha);

/// Row-wise softmax with per-row max subtraction.
Matrix SoftmaxRows(const Matrix &m);

double Dot(std::span<const double> a, std::span<const double> b);
double Norm2(std::span<const double> v);
bool AllFinite(std::span<const double> v);
double MaxAbsDiff(const Matrix &a, const Matrix &b);

/// log(sum(exp(v))) computed stably; v must be non-empty.
double LogSumExp(std::span<const double> v);

// A learnable tensor and its gradient accumulator.
struct Param {
  Param() = default;
  explicit Param(Matrix v) : value(std::move(v)), grad(value.NumRows(), value.NumCols()) {}

  void ZeroGrad() { grad.SetZero(); }

  Matrix value;
  Matrix grad;
};

}  // namespace lde

#endif  // LDE_MATRIX_H_
