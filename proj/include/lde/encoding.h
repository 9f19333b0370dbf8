// lde/encoding.h

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

#ifndef LDE_ENCODING_H_
#define LDE_ENCODING_H_

#include <cstddef>
#include <vector>

#include "lde/matrix.h"
#include "lde/rng.h"

namespace lde {

// Feature sequences throughout the library are D x L matrices: one column
// per frame.
using FeatureSequence = Matrix;

enum class SmoothingMode {
  kSharedBeta,    // one fixed smoothing factor for every center
  kPerComponent,  // learnable s_c per center
};

enum class AggregationMode {
  kNormalized,  // e_c = sum_t w_tc r_tc / sum_t w_tc
  kMean,        // e_c = sum_t w_tc r_tc / L
};

struct LdeConfig {
  std::size_t num_components = 8;
  std::size_t feature_dim = 0;
  SmoothingMode smoothing = SmoothingMode::kPerComponent;
  double beta = 1.0;  // used only in kSharedBeta mode
  AggregationMode aggregation = AggregationMode::kMean;
  bool length_normalize = true;

  /// Throws ArgumentError unless C >= 1, D >= 1 and beta > 0 when shared.
  void Validate() const;

  bool operator==(const LdeConfig &) const = default;
};

/// Denominator floor for normalized aggregation and for length normalization.
inline constexpr double kTinyDenominator = 1e-30;

// The learnable dictionary: C centers and, in per-component mode, one
// unconstrained raw smoothing value per center. The effective smoothing is
// softplus(raw), which keeps it positive under any SGD update.
class Dictionary {
 public:
  Dictionary() = default;
  /// All-zero centers, raw smoothing 0 (effective smoothing ln 2).
  explicit Dictionary(const LdeConfig &cfg);

  /// Centers uniform in [-1/sqrt(C), 1/sqrt(C)] per coordinate, effective
  /// smoothing uniform in (0, 1].
  static Dictionary RandomInit(const LdeConfig &cfg, Rng *rng);

  std::size_t NumComponents() const { return centers.value.NumRows(); }
  std::size_t FeatureDim() const { return centers.value.NumCols(); }

  /// Effective smoothing factor of center c (per-component mode).
  double Smoothing(std::size_t c) const;
  void SetSmoothing(std::size_t c, double s);

  void ZeroGrad() {
    centers.ZeroGrad();
    raw_smoothing.ZeroGrad();
  }

  Param centers;        // C x D
  Param raw_smoothing;  // C x 1
};

double Softplus(double x);
double InverseSoftplus(double y);
double Sigmoid(double x);

// Everything LdeBackward needs, cached by LdeForward.
struct LdeSaved {
  std::size_t length = 0;
  std::size_t num_components = 0;
  std::size_t feature_dim = 0;
  Matrix weights;                // L x C, rows sum to 1
  std::vector<double> residuals;  // L*C*D, index (t*C + c)*D + d
  Vector smoothing;              // effective s_c (or beta) used in forward
  Vector denominators;           // per-component aggregation denominators
  std::vector<bool> floored;     // denominator hit kTinyDenominator
  Matrix aggregated;             // C x D, before length normalization
  double norm = 0.0;
  bool length_normalized = false;
  bool zero_norm = false;

  double Residual(std::size_t t, std::size_t c, std::size_t d) const {
    return residuals[(t * num_components + c) * feature_dim + d];
  }
};

struct EncodedVector {
  Matrix e;  // C x D; its row-major storage is the flattened C*D vector
  bool zero_norm = false;
  bool any_floored = false;

  std::span<const double> Flat() const { return e.Data(); }
};

struct LdeResult {
  EncodedVector encoded;
  LdeSaved saved;
};

/**
   Learnable dictionary encoding of a D x L sequence.

   For every frame t and center c the residual r_tc = x_t - mu_c is weighted
   by w_tc = softmax_c(-s_c |r_tc|^2) and aggregated per center. In normalized
   mode a per-center weight sum below kTinyDenominator is replaced by
   kTinyDenominator and reported through EncodedVector::any_floored. The
   flattened C*D output is length normalized last when the config asks for it.

   Throws EmptySequenceError for L = 0 and DimensionError for shape
   mismatches between x, the dictionary and cfg.
*/
LdeResult LdeForward(const FeatureSequence &x, const Dictionary &dict,
                     const LdeConfig &cfg);

/**
   Backward pass of LdeForward. grad_out is dloss/dE as a C x D matrix.
   Returns dloss/dx (D x L) and accumulates dloss/dmu into dict->centers.grad
   and, in per-component mode, dloss/draw_smoothing into
   dict->raw_smoothing.grad.
*/
Matrix LdeBackward(const LdeSaved &saved, const Matrix &grad_out, Dictionary *dict,
                   const LdeConfig &cfg);

/// Temporal average pooling: mean over the L columns.
Vector TapForward(const FeatureSequence &x);
/// dloss/dx of TapForward for a sequence of `length` frames.
Matrix TapBackward(std::span<const double> grad_out, std::size_t length);

struct NormalizedVector {
  Vector v;
  bool zero_norm = false;
};

/// v / |v|, or v unchanged with zero_norm set when |v| <= kTinyDenominator.
NormalizedVector LengthNormalize(std::span<const double> v);

/// Nearest center per frame by squared distance, lowest index on ties.
std::vector<std::size_t> HardAssign(const FeatureSequence &x, const Dictionary &dict);

}  // namespace lde

#endif  // LDE_ENCODING_H_
