// src/baseline.cc

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

#include "lde/baseline.h"

#include <spdlog/spdlog.h>

#include "lde/error.h"

namespace lde {

std::string GmmBackendName(GmmBackend b) {
  return b == GmmBackend::kSupervector ? "supervector" : "llk";
}

GmmBackend ParseGmmBackend(const std::string &name) {
  if (name == "supervector") return GmmBackend::kSupervector;
  if (name == "llk") return GmmBackend::kLikelihood;
  throw ConfigError("unknown gmm backend '" + name + "' (expected supervector or llk)");
}

void GmmBaselineConfig::Validate() const {
  if (num_components == 0) throw ConfigError("gmm: num_components must be >= 1");
  if (frame_stride == 0) throw ConfigError("gmm: frame_stride must be >= 1");
  if (use_sdc && (sdc_n == 0 || sdc_k == 0)) throw ConfigError("gmm: bad sdc parameters");
  if (batch_size == 0) throw ConfigError("gmm: batch_size must be >= 1");
  classifier_sgd.Validate();
}

FeatureSequence GmmBaseline::Features(const FeatureSequence &x) const {
  if (!config.use_sdc) return x;
  return Sdc(x, config.sdc_n, config.sdc_d, config.sdc_p, config.sdc_k, config.sdc_static);
}

Vector GmmBaseline::Scores(const FeatureSequence &x) const {
  FeatureSequence f = Features(x);
  if (config.backend == GmmBackend::kLikelihood) return GmmClassify(class_models, f);
  Supervector sv = MakeSupervector(AccumulateStats(ubm, f));
  return classifier.Forward(sv.normalized);
}

namespace {

Matrix PoolFrames(const std::vector<FeatureSequence> &feats, std::size_t stride) {
  std::size_t total = 0;
  for (const auto &f : feats) total += (f.NumCols() + stride - 1) / stride;
  if (feats.empty()) throw ArgumentError("gmm: no frames to fit");
  Matrix pooled(feats[0].NumRows(), total);
  std::size_t col = 0;
  for (const auto &f : feats)
    for (std::size_t t = 0; t < f.NumCols(); t += stride, ++col)
      for (std::size_t d = 0; d < f.NumRows(); ++d) pooled(d, col) = f(d, t);
  return pooled;
}

}  // namespace

GmmBaseline TrainGmmBaseline(const Corpus &train, const GmmBaselineConfig &cfg) {
  cfg.Validate();
  if (train.utterances.empty()) throw ArgumentError("gmm: empty training corpus");
  GmmBaseline out;
  out.config = cfg;
  out.num_classes = train.num_classes;
  const Rng root(cfg.seed);

  std::vector<FeatureSequence> feats;
  feats.reserve(train.utterances.size());
  for (const auto &u : train.utterances) feats.push_back(out.Features(u.features));

  if (cfg.backend == GmmBackend::kLikelihood) {
    for (std::size_t k = 0; k < train.num_classes; ++k) {
      std::vector<FeatureSequence> mine;
      for (std::size_t i = 0; i < feats.size(); ++i)
        if (train.utterances[i].label == k) mine.push_back(feats[i]);
      if (mine.empty())
        throw ArgumentError("gmm: class " + std::to_string(k) + " has no training data");
      Rng rng = root.Split("class").Split(k);
      EmResult em = EmFit(PoolFrames(mine, cfg.frame_stride), cfg.num_components, cfg.em_iters, &rng);
      spdlog::debug("gmm class {} final log-likelihood {}", k, em.log_likelihoods.back());
      out.class_models.push_back(std::move(em.model));
    }
    return out;
  }

  Rng ubm_rng = root.Split("ubm");
  EmResult em = EmFit(PoolFrames(feats, cfg.frame_stride), cfg.num_components, cfg.em_iters, &ubm_rng);
  out.ubm = std::move(em.model);
  std::vector<Vector> svs;
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < feats.size(); ++i) {
    svs.push_back(MakeSupervector(AccumulateStats(out.ubm, feats[i])).normalized);
    labels.push_back(train.utterances[i].label);
  }
  out.classifier = TrainLinear(svs, labels, train.num_classes, cfg.classifier_sgd,
                               cfg.batch_size, root.Split("classifier"));
  return out;
}

}  // namespace lde
