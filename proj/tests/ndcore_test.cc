// tests/ndcore_test.cc

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

#include <cmath>
#include <set>

#include "doctest.h"
#include "lde/error.h"
#include "lde/matrix.h"
#include "lde/rng.h"
#include "test_util.h"

namespace lde {

TEST_CASE("matmul small cases") {
  Matrix id{{1, 0}, {0, 1}};
  Matrix m{{1, 2}, {3, 4}};
  CHECK(MatMul(id, m) == m);
  Matrix row{{1, 2}};
  Matrix col{{3}, {4}};
  CHECK(MatMul(row, col) == Matrix{{11}});
  CHECK_THROWS_AS(MatMul(row, row), DimensionError);
}

TEST_CASE("matmul matches triple-loop reference") {
  Rng rng(7);
  Matrix a = testing::RandomMatrix(&rng, 5, 7);
  Matrix b = testing::RandomMatrix(&rng, 7, 3);
  Matrix ref(5, 3);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      long double s = 0;
      for (std::size_t k = 0; k < 7; ++k) s += (long double)a(i, k) * b(k, j);
      ref(i, j) = static_cast<double>(s);
    }
  CHECK(MaxAbsDiff(MatMul(a, b), ref) <= 1e-12);
}

TEST_CASE("matmul is bit-identical to the in-order sum for any shape") {
  Rng rng(13);
  for (std::size_t n : {1, 3, 4, 9}) {
    for (std::size_t k : {0, 1, 17}) {
      for (std::size_t m : {1, 7, 8, 21}) {
        Matrix a = testing::RandomMatrix(&rng, n, k);
        Matrix b = testing::RandomMatrix(&rng, k, m);
        Matrix ref(n, m);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s += a(i, p) * b(p, j);
            ref(i, j) = s;
          }
        CHECK(MatMul(a, b) == ref);
      }
    }
  }
}

TEST_CASE("matmul is associative on random triples") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a = testing::RandomMatrix(&rng, 4, 6);
    Matrix b = testing::RandomMatrix(&rng, 6, 5);
    Matrix c = testing::RandomMatrix(&rng, 5, 3);
    Matrix left = MatMul(MatMul(a, b), c);
    Matrix right = MatMul(a, MatMul(b, c));
    double scale = 0.0;
    for (double v : left.Data()) scale = std::max(scale, std::abs(v));
    CHECK(MaxAbsDiff(left, right) <= 1e-9 * std::max(scale, 1.0));
  }
}

TEST_CASE("softmax rows") {
  Matrix u = SoftmaxRows(Matrix{{0, 0, 0}});
  for (double v : u.Data()) CHECK(std::abs(v - 1.0 / 3.0) <= 1e-15);

  Matrix big = SoftmaxRows(Matrix{{1000, 0}});
  CHECK(std::abs(big(0, 0) - 1.0) <= 1e-12);
  CHECK(big(0, 1) >= 0.0);
  CHECK(big(0, 1) <= 1e-12);

  Matrix s = SoftmaxRows(Matrix{{1, 2, 3}});
  long double z = std::exp(1.0L) + std::exp(2.0L) + std::exp(3.0L);
  for (int c = 0; c < 3; ++c)
    CHECK(std::abs(s(0, c) - static_cast<double>(std::exp((long double)(c + 1)) / z)) <=
          1e-12);
}

TEST_CASE("softmax rows sum to one for large-magnitude inputs") {
  Rng rng(3);
  Matrix m = testing::RandomMatrix(&rng, 200, 9, 1000.0);
  Matrix s = SoftmaxRows(m);
  for (std::size_t r = 0; r < s.NumRows(); ++r) {
    double sum = 0.0;
    for (double v : s.Row(r)) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("rng gaussian") {
  Rng a(42), b(42);
  CHECK(RngGaussian(&a, 4, 5, 0.0, 1.0) == RngGaussian(&b, 4, 5, 0.0, 1.0));

  Rng z(1);
  Matrix constant = RngGaussian(&z, 3, 3, 2.5, 0.0);
  for (double v : constant.Data()) CHECK(v == 2.5);

  Rng bad(1);
  CHECK_THROWS_AS(RngGaussian(&bad, 1, 1, 0.0, -1.0), ArgumentError);

  Rng big(123);
  Matrix draws = RngGaussian(&big, 1000, 1000, 0.0, 1.0);
  double sum = 0.0, sq = 0.0;
  for (double v : draws.Data()) {
    sum += v;
    sq += v * v;
  }
  const double n = static_cast<double>(draws.Size());
  const double mean = sum / n;
  const double std = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean) <= 0.01);
  CHECK(std >= 0.99);
  CHECK(std <= 1.01);
}

TEST_CASE("rng streams and integers") {
  Rng root(5);
  Rng s1 = root.Split("init"), s2 = root.Split("init"), s3 = root.Split("data");
  CHECK(s1.NextU64() == s2.NextU64());
  CHECK(root.Split("init").NextU64() != s3.NextU64());

  // Splitting is independent of the parent's position.
  Rng used(5);
  for (int i = 0; i < 10; ++i) used.NextU64();
  CHECK(used.Split(9).NextU64() == Rng(5).Split(9).NextU64());

  Rng r(8);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    auto v = r.UniformRange(-2, 2);
    CHECK(v >= -2);
    CHECK(v <= 2);
    seen.insert(v);
  }
  CHECK(seen.size() == 5);

  Rng resumed = Rng::FromState(r.key(), r.counter());
  CHECK(resumed.NextU64() == r.NextU64());
}

TEST_CASE("param shapes") {
  Param p(Matrix(2, 3, 1.0));
  CHECK(p.grad.SameShape(p.value));
  p.grad.Fill(4.0);
  p.ZeroGrad();
  for (double v : p.grad.Data()) CHECK(v == 0.0);
}

}  // namespace lde
