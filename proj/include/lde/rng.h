// lde/rng.h

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

#ifndef LDE_RNG_H_
#define LDE_RNG_H_

#include <cstdint>
#include <span>
#include <string_view>

#include "lde/matrix.h"

namespace lde {

/**
   Counter-based generator: draw i is a fixed 64-bit mixing function of
   (key, i). Streams derived with Split() are independent of how many draws
   the parent has made, so data generation, initialization and cropping can
   each be reseeded and reproduced on their own.

   Every distribution here is implemented in this file rather than through
   <random> distributions, whose algorithms differ between standard
   libraries; the sequences are identical on every platform.
*/
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  static Rng FromState(std::uint64_t key, std::uint64_t counter);

  std::uint64_t NextU64();
  /// Uniform in [0, 1) with 53 random bits.
  double Uniform();
  /// Uniform integer in [0, n); n must be > 0.
  std::uint64_t UniformInt(std::uint64_t n);
  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t UniformRange(std::int64_t lo, std::int64_t hi);
  /// Standard normal draw (Box-Muller; two counters per draw).
  double Gaussian();

  Rng Split(std::uint64_t stream) const;
  Rng Split(std::string_view name) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  Rng(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}
  std::uint64_t key_;
  std::uint64_t counter_;
};

/// rows x cols matrix of N(mean, std^2) draws. Throws ArgumentError on std < 0.
Matrix RngGaussian(Rng *rng, std::size_t rows, std::size_t cols, double mean,
                   double std);

/// Fisher-Yates shuffle driven by rng.
template <typename T>
void Shuffle(Rng *rng, std::span<T> items) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = rng->UniformInt(i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace lde

#endif  // LDE_RNG_H_
