// lde/train.h

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

#ifndef LDE_TRAIN_H_
#define LDE_TRAIN_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lde/encoding.h"
#include "lde/frontend.h"
#include "lde/matrix.h"
#include "lde/rng.h"
#include "lde/traindata.h"

namespace lde {

class LinearClassifier {
 public:
  LinearClassifier() = default;
  /// Zero weights and bias.
  LinearClassifier(std::size_t num_classes, std::size_t input_dim);
  /// Weights uniform in [-1/sqrt(E), 1/sqrt(E)], zero bias.
  LinearClassifier(std::size_t num_classes, std::size_t input_dim, Rng *rng);

  std::size_t NumClasses() const { return weight.value.NumRows(); }
  std::size_t InputDim() const { return weight.value.NumCols(); }

  Vector Forward(std::span<const double> e) const;
  /// Accumulates parameter gradients and returns dloss/de.
  Vector Backward(std::span<const double> e, std::span<const double> grad_logits);

  Param weight;  // K x E
  Param bias;    // K x 1
};

struct CrossEntropyResult {
  double loss = 0.0;
  Vector grad;  // softmax(logits) - onehot(label)
};

/// Throws ArgumentError when label >= logits.size().
CrossEntropyResult CrossEntropy(std::span<const double> logits, std::size_t label);

struct SgdConfig {
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::size_t epochs = 90;
  // lr(epoch) = lr / divisors[i] for the last milestone i with milestones[i] <= epoch.
  std::vector<std::size_t> milestones = {60, 80};
  std::vector<double> divisors = {10.0, 100.0};

  void Validate() const;
  double LrAt(std::size_t epoch) const;

  bool operator==(const SgdConfig &) const = default;
};

/// Momentum SGD with coupled weight decay. Velocities are matched to
/// parameters by position, so callers pass the same list every step.
class Sgd {
 public:
  explicit Sgd(const SgdConfig &cfg) : cfg_(cfg) {}

  /// v <- m v + (g + wd p); p <- p - lr v; then zeroes the gradients.
  void Step(const std::vector<Param *> &params, double lr);

  const std::vector<Matrix> &velocities() const { return velocities_; }

 private:
  SgdConfig cfg_;
  std::vector<Matrix> velocities_;
};

enum class PoolingKind { kTap, kLde };

std::string PoolingName(PoolingKind p);
PoolingKind ParsePooling(const std::string &name);

enum class CenterInit { kUniform, kZero };

struct ModelSpec {
  ConvSpec frontend;
  PoolingKind pooling = PoolingKind::kLde;
  LdeConfig lde;  // feature_dim is taken from the frontend output
  std::size_t num_classes = 4;
  CenterInit center_init = CenterInit::kUniform;
  bool freeze_centers = false;

  void Validate() const;
  std::size_t EmbeddingDim() const;
  LdeConfig EffectiveLde() const;

  bool operator==(const ModelSpec &) const = default;
};

/**
   Frontend, then temporal average or dictionary encoding, then a linear
   classifier. The whole variable-length sequence is scored; nothing is
   cropped at inference.
*/
class Model {
 public:
  Model() = default;
  /// Zero-initialized parameters of the right shapes.
  explicit Model(const ModelSpec &spec);
  /// Random initialization from independent streams of `rng`.
  Model(const ModelSpec &spec, const Rng &rng);

  const ModelSpec &spec() const { return spec_; }

  /// Per-class scores (logits). Throws LengthError for too-short input.
  Vector Scores(const FeatureSequence &x) const;
  /// Utterance-level representation fed to the classifier.
  Vector Embed(const FeatureSequence &x) const;

  /// Adds scale * dloss/dparam for the cross-entropy of one utterance to
  /// every gradient and returns its unscaled loss.
  double AccumulateGradient(const FeatureSequence &x, std::size_t label, double scale);

  /// Every parameter, with stable names.
  std::vector<std::pair<std::string, Param *>> NamedParams();
  /// Parameters updated by the optimizer (frozen ones excluded).
  std::vector<Param *> TrainableParams();
  void ZeroGrad();

  Frontend &frontend() { return frontend_; }
  Dictionary &dictionary() { return dict_; }
  LinearClassifier &classifier() { return classifier_; }

 private:
  ModelSpec spec_;
  LdeConfig lde_;
  Frontend frontend_;
  Dictionary dict_;
  LinearClassifier classifier_;
};

struct TrainConfig {
  SgdConfig sgd;
  std::size_t batch_size = 32;
  CropPolicy crop;
  std::uint64_t seed = 1;
  std::size_t smooth_window = 400;

  void Validate() const;

  bool operator==(const TrainConfig &) const = default;
};

struct LossRecord {
  std::size_t step = 0;
  double loss = 0.0;
  double smoothed = 0.0;  // mean of the last smooth_window losses
};

struct TrainResult {
  Model model;
  std::vector<LossRecord> log;
  std::size_t epochs_done = 0;
  Rng data_rng{0};  // state of the batching stream after the last step
};

/// Called after every epoch with (epoch, lr, mean loss of the epoch).
using EpochCallback = std::function<void(std::size_t, double, double)>;

/// The model TrainModel starts from for this seed.
Model InitialModel(const ModelSpec &spec, std::uint64_t seed);

/**
   Trains from the seed alone: initialization streams and the batching
   stream are derived from cfg.seed. Throws NumericalError as soon as a
   batch loss is not finite.
*/
TrainResult TrainModel(const Corpus &corpus, const ModelSpec &spec, const TrainConfig &cfg,
                       const EpochCallback &on_epoch = {});

/// Mean cross-entropy loss over the last `window` entries ending at i.
std::vector<double> SmoothLosses(std::span<const double> losses, std::size_t window);

std::string FormatLossLog(const std::vector<LossRecord> &log);

/**
   Fits a linear classifier to fixed vectors with the same momentum SGD,
   full vectors per example and batches in seeded order. Used by the GMM
   supervector baseline and by tests.
*/
LinearClassifier TrainLinear(const std::vector<Vector> &inputs,
                             const std::vector<std::size_t> &labels, std::size_t num_classes,
                             const SgdConfig &sgd, std::size_t batch_size, Rng rng);

}  // namespace lde

#endif  // LDE_TRAIN_H_
