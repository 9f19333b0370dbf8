// lde/gmm.h

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

#ifndef LDE_GMM_H_
#define LDE_GMM_H_

#include <cstddef>
#include <vector>

#include "lde/encoding.h"
#include "lde/matrix.h"
#include "lde/rng.h"

namespace lde {

// Diagonal-covariance Gaussian mixture.
class GmmModel {
 public:
  GmmModel() = default;
  GmmModel(Vector weights, Matrix means, Matrix variances);

  std::size_t NumComponents() const { return weights_.size(); }
  std::size_t Dim() const { return means_.NumCols(); }

  const Vector &weights() const { return weights_; }
  const Matrix &means() const { return means_; }
  const Matrix &variances() const { return variances_; }

  /// Throws ArgumentError unless weights sum to 1 and variances are positive.
  void Validate() const;

  /// log(p_c N(x; mu_c, Sigma_c)) for every component; x has Dim() entries.
  void ComponentLogLikes(std::span<const double> x, std::span<double> out) const;

  bool operator==(const GmmModel &) const = default;

 private:
  void ComputeConstants();

  Vector weights_;
  Matrix means_;
  Matrix variances_;
  Vector log_consts_;  // log p_c - 0.5 * sum_d log(2 pi var_cd)
  Matrix inv_vars_;
};

// Zeroth and centered first order Baum-Welch statistics of one utterance.
struct BaumWelchStats {
  Vector n;  // C
  Matrix f;  // C x D, sum_t P(c|x_t) (x_t - mu_c)
};

struct Supervector {
  Vector v;           // concatenated centered means, component order
  Vector normalized;  // v / |v|
  std::vector<bool> unseen;
};

/// Per-frame component posteriors, L x C, computed in the log domain.
Matrix Posteriors(const GmmModel &model, const FeatureSequence &x);

/// log p(x_t | model) for every frame.
Vector FrameLogLikelihoods(const GmmModel &model, const FeatureSequence &x);

BaumWelchStats AccumulateStats(const GmmModel &model, const FeatureSequence &x);

/// F_c / N_c per component, concatenated. Components with N_c below
/// kTinyDenominator are flagged unseen and contribute zeros.
Supervector MakeSupervector(const BaumWelchStats &stats);

struct EmOptions {
  std::size_t kmeans_iters = 10;
  double variance_floor_scale = 1e-3;  // times the global per-dim variance
  double empty_threshold = 1e-6;
};

struct EmResult {
  GmmModel model;
  /// Total data log-likelihood under the model entering each iteration, plus
  /// one final entry for the returned model.
  std::vector<double> log_likelihoods;
  /// Iterations in which an empty component was re-seeded.
  std::vector<std::size_t> reseeded_at;
};

/**
   Fits a C-component diagonal GMM to the columns of `frames` (D x N) by EM,
   starting from seeded k-means. Requires N >= 10 C. Variances are floored at
   variance_floor_scale times the global per-dimension variance.
*/
EmResult EmFit(const Matrix &frames, std::size_t num_components, std::size_t iters,
               Rng *rng, const EmOptions &opts = {});

/// Average frame log-likelihood of x under each model.
Vector GmmClassify(const std::vector<GmmModel> &models, const FeatureSequence &x);

}  // namespace lde

#endif  // LDE_GMM_H_
