// src/rng.cc

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

#include "lde/rng.h"

#include <cmath>
#include <numbers>

#include "lde/error.h"

namespace lde {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer.
std::uint64_t Mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : key_(Mix64(seed + kGolden)), counter_(0) {}

Rng Rng::FromState(std::uint64_t key, std::uint64_t counter) { return Rng(key, counter); }

std::uint64_t Rng::NextU64() {
  // Two rounds so that nearby keys do not give correlated streams.
  std::uint64_t c = counter_++;
  return Mix64(Mix64(key_ ^ (c * kGolden)) + c);
}

double Rng::Uniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::UniformInt(std::uint64_t n) {
  if (n == 0) throw ArgumentError("Rng::UniformInt: n must be positive");
  // Rejection sampling on the top of the range to avoid modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = NextU64();
  } while (x >= limit);
  return x % n;
}

std::int64_t Rng::UniformRange(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw ArgumentError("Rng::UniformRange: hi < lo");
  return lo + static_cast<std::int64_t>(
                  UniformInt(static_cast<std::uint64_t>(hi - lo) + 1));
}

double Rng::Gaussian() {
  double u1 = 1.0 - Uniform();  // (0, 1]
  double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Rng Rng::Split(std::uint64_t stream) const {
  return Rng(Mix64(key_ ^ Mix64(stream + kGolden)), 0);
}

Rng Rng::Split(std::string_view name) const {
  // FNV-1a of the name picks the stream id.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return Split(h);
}

Matrix RngGaussian(Rng *rng, std::size_t rows, std::size_t cols, double mean,
                   double std) {
  if (!(std >= 0.0)) throw ArgumentError("RngGaussian: std must be >= 0");
  Matrix out(rows, cols);
  for (double &v : out.Data()) v = mean + std * rng->Gaussian();
  return out;
}

}  // namespace lde
