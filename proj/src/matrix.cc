// src/matrix.cc

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

#include "lde/matrix.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "lde/error.h"

namespace lde {

namespace {

std::string ShapeStr(const Matrix &m) {
  return std::to_string(m.NumRows()) + "x" + std::to_string(m.NumCols());
}

void CheckSameShape(const Matrix &a, const Matrix &b, const char *op) {
  if (!a.SameShape(b))
    throw DimensionError(std::string(op) + ": shape mismatch " + ShapeStr(a) +
                         " vs " + ShapeStr(b));
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols)
    throw DimensionError("Matrix: data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(rows) + "x" +
                         std::to_string(cols));
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto &r : rows) {
    if (r.size() != cols_) throw DimensionError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Vector Matrix::Col(std::size_t c) const {
  Vector out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = data_[r * cols_ + c];
  return out;
}

void Matrix::SetCol(std::size_t c, std::span<const double> v) {
  if (v.size() != rows_) throw DimensionError("Matrix::SetCol: length mismatch");
  for (std::size_t r = 0; r < rows_; ++r) data_[r * cols_ + c] = v[r];
}

void Matrix::SetZero() { std::fill(data_.begin(), data_.end(), 0.0); }

void Matrix::Fill(double value) { std::fill(data_.begin(), data_.end(), value); }

namespace {

// Register-tiled product kernel. Every output element accumulates its terms
// in increasing p starting from zero, exactly like the plain triple loop, so
// the result is bit-identical whichever clone the loader picks.
constexpr std::size_t kTileRows = 4;
constexpr std::size_t kTileCols = 8;
typedef double Vec4 __attribute__((vector_size(32)));

#if defined(__GNUC__) && defined(__x86_64__) && !defined(__clang__)
#define LDE_CLONES __attribute__((target_clones("avx2", "default")))
#else
#define LDE_CLONES
#endif

LDE_CLONES void MulKernel(const double *a, const double *b, double *out, std::size_t n,
                          std::size_t k, std::size_t m) {
  const std::size_t n_full = n - n % kTileRows, m_full = m - m % kTileCols;
  for (std::size_t i0 = 0; i0 < n_full; i0 += kTileRows) {
    const double *a_rows[kTileRows];
    for (std::size_t r = 0; r < kTileRows; ++r) a_rows[r] = a + (i0 + r) * k;
    for (std::size_t j0 = 0; j0 < m_full; j0 += kTileCols) {
      Vec4 acc[kTileRows][2] = {};
      for (std::size_t p = 0; p < k; ++p) {
        Vec4 b0, b1;
        std::memcpy(&b0, b + p * m + j0, sizeof(Vec4));
        std::memcpy(&b1, b + p * m + j0 + 4, sizeof(Vec4));
        for (std::size_t r = 0; r < kTileRows; ++r) {
          const double av = a_rows[r][p];
          const Vec4 avv = {av, av, av, av};
          acc[r][0] += avv * b0;
          acc[r][1] += avv * b1;
        }
      }
      for (std::size_t r = 0; r < kTileRows; ++r) {
        std::memcpy(out + (i0 + r) * m + j0, &acc[r][0], sizeof(Vec4));
        std::memcpy(out + (i0 + r) * m + j0 + 4, &acc[r][1], sizeof(Vec4));
      }
    }
  }
  // Ragged right columns and bottom rows.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j_start = i < n_full ? m_full : 0;
    if (j_start == m) continue;
    double *orow = out + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double *brow = b + p * m;
      for (std::size_t j = j_start; j < m; ++j) orow[j] += aip * brow[j];
    }
  }
}

}  // namespace

Matrix MatMul(const Matrix &a, const Matrix &b) {
  if (a.NumCols() != b.NumRows())
    throw DimensionError("MatMul: " + ShapeStr(a) + " times " + ShapeStr(b));
  Matrix out(a.NumRows(), b.NumCols());
  if (out.Data().empty()) return out;
  MulKernel(a.Data().data(), b.Data().data(), out.Data().data(), a.NumRows(), a.NumCols(),
            b.NumCols());
  return out;
}

Matrix Transpose(const Matrix &m) {
  Matrix out(m.NumCols(), m.NumRows());
  for (std::size_t r = 0; r < m.NumRows(); ++r)
    for (std::size_t c = 0; c < m.NumCols(); ++c) out(c, r) = m(r, c);
  return out;
}

void AddScaled(Matrix *y, double alpha, const Matrix &x) {
  CheckSameShape(*y, x, "AddScaled");
  auto yd = y->Data();
  auto xd = x.Data();
  for (std::size_t i = 0; i < yd.size(); ++i) yd[i] += alpha * xd[i];
}

Matrix Add(const Matrix &a, const Matrix &b) {
  Matrix out = a;
  AddScaled(&out, 1.0, b);
  return out;
}

Matrix Scale(const Matrix &m, double alpha) {
  Matrix out = m;
  for (double &v : out.Data()) v *= alpha;
  return out;
}

Matrix SoftmaxRows(const Matrix &m) {
  Matrix out(m.NumRows(), m.NumCols());
  for (std::size_t r = 0; r < m.NumRows(); ++r) {
    auto in = m.Row(r);
    auto o = out.Row(r);
    if (in.empty()) continue;
    const double mx = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      o[c] = std::exp(in[c] - mx);
      sum += o[c];
    }
    for (double &v : o) v /= sum;
  }
  return out;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("Dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double Norm2(std::span<const double> v) { return std::sqrt(Dot(v, v)); }

bool AllFinite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double MaxAbsDiff(const Matrix &a, const Matrix &b) {
  CheckSameShape(a, b, "MaxAbsDiff");
  double m = 0.0;
  auto ad = a.Data();
  auto bd = b.Data();
  for (std::size_t i = 0; i < ad.size(); ++i) m = std::max(m, std::abs(ad[i] - bd[i]));
  return m;
}

double LogSumExp(std::span<const double> v) {
  if (v.empty()) throw ArgumentError("LogSumExp: empty input");
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace lde
