// lde/baseline.h

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

#ifndef LDE_BASELINE_H_
#define LDE_BASELINE_H_

// GMM baseline systems built on the gmm module.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lde/gmm.h"
#include "lde/train.h"
#include "lde/traindata.h"

namespace lde {

enum class GmmBackend {
  kSupervector,  // UBM, length-normalized supervector, linear classifier
  kLikelihood,   // one GMM per class, average frame log-likelihood
};

std::string GmmBackendName(GmmBackend b);
GmmBackend ParseGmmBackend(const std::string &name);

struct GmmBaselineConfig {
  GmmBackend backend = GmmBackend::kSupervector;
  std::size_t num_components = 16;  // UBM size, or per-class size for kLikelihood
  std::size_t em_iters = 20;
  std::size_t frame_stride = 4;  // every n-th frame goes into EM
  bool use_sdc = false;
  std::size_t sdc_n = 7, sdc_d = 1, sdc_p = 3, sdc_k = 7;
  bool sdc_static = true;
  SgdConfig classifier_sgd{1.0, 0.9, 1e-4, 60, {40, 50}, {10.0, 100.0}};
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;

  void Validate() const;
  bool operator==(const GmmBaselineConfig &) const = default;
};

class GmmBaseline {
 public:
  GmmBaseline() = default;

  /// Feature transform applied before any GMM computation.
  FeatureSequence Features(const FeatureSequence &x) const;
  Vector Scores(const FeatureSequence &x) const;

  GmmBaselineConfig config;
  std::size_t num_classes = 0;
  GmmModel ubm;                          // kSupervector
  LinearClassifier classifier;           // kSupervector
  std::vector<GmmModel> class_models;    // kLikelihood
};

GmmBaseline TrainGmmBaseline(const Corpus &train, const GmmBaselineConfig &cfg);

}  // namespace lde

#endif  // LDE_BASELINE_H_
