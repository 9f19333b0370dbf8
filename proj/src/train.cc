// src/train.cc

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

#include "lde/train.h"

#include <cmath>
#include <cstdio>
#include <numeric>

#include <spdlog/spdlog.h>

#include "lde/error.h"

namespace lde {

LinearClassifier::LinearClassifier(std::size_t num_classes, std::size_t input_dim)
    : weight(Matrix(num_classes, input_dim)), bias(Matrix(num_classes, 1)) {
  if (num_classes == 0 || input_dim == 0)
    throw ArgumentError("LinearClassifier: empty shape");
}

LinearClassifier::LinearClassifier(std::size_t num_classes, std::size_t input_dim, Rng *rng)
    : LinearClassifier(num_classes, input_dim) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  for (double &w : weight.value.Data()) w = bound * (2.0 * rng->Uniform() - 1.0);
}

Vector LinearClassifier::Forward(std::span<const double> e) const {
  if (e.size() != InputDim())
    throw DimensionError("LinearClassifier: input dim " + std::to_string(e.size()) +
                         " != " + std::to_string(InputDim()));
  Vector logits(NumClasses());
  for (std::size_t k = 0; k < NumClasses(); ++k)
    logits[k] = Dot(weight.value.Row(k), e) + bias.value(k, 0);
  return logits;
}

Vector LinearClassifier::Backward(std::span<const double> e,
                                  std::span<const double> grad_logits) {
  if (e.size() != InputDim() || grad_logits.size() != NumClasses())
    throw ContractError("LinearClassifier::Backward: shape mismatch");
  Vector grad_e(InputDim(), 0.0);
  for (std::size_t k = 0; k < NumClasses(); ++k) {
    const double g = grad_logits[k];
    auto w = weight.value.Row(k);
    auto gw = weight.grad.Row(k);
    for (std::size_t j = 0; j < e.size(); ++j) {
      gw[j] += g * e[j];
      grad_e[j] += g * w[j];
    }
    bias.grad(k, 0) += g;
  }
  return grad_e;
}

CrossEntropyResult CrossEntropy(std::span<const double> logits, std::size_t label) {
  if (label >= logits.size())
    throw ArgumentError("CrossEntropy: label " + std::to_string(label) + " out of range");
  std::size_t top = 0;
  for (std::size_t k = 1; k < logits.size(); ++k)
    if (logits[k] > logits[top]) top = k;
  const double m = logits[top];
  double rest = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k)
    if (k != top) rest += std::exp(logits[k] - m);
  const double lse = m + std::log1p(rest);
  CrossEntropyResult out;
  out.loss = lse - logits[label];
  out.grad.resize(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) out.grad[k] = std::exp(logits[k] - lse);
  out.grad[label] -= 1.0;
  return out;
}

void SgdConfig::Validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("sgd: lr must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("sgd: momentum must be in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("sgd: weight_decay must be >= 0");
  if (epochs == 0) throw ConfigError("sgd: epochs must be >= 1");
  if (milestones.size() != divisors.size())
    throw ConfigError("sgd: milestones and divisors differ in length");
  for (std::size_t i = 0; i < milestones.size(); ++i) {
    if (milestones[i] >= epochs) throw ConfigError("sgd: milestone beyond the last epoch");
    if (i > 0 && milestones[i] <= milestones[i - 1])
      throw ConfigError("sgd: milestones must increase");
    if (!(divisors[i] > 0.0)) throw ConfigError("sgd: divisors must be positive");
  }
}

double SgdConfig::LrAt(std::size_t epoch) const {
  double out = lr;
  for (std::size_t i = 0; i < milestones.size(); ++i)
    if (epoch >= milestones[i]) out = lr / divisors[i];
  return out;
}

void Sgd::Step(const std::vector<Param *> &params, double lr) {
  if (velocities_.empty())
    for (const Param *p : params) velocities_.emplace_back(p->value.NumRows(), p->value.NumCols());
  if (velocities_.size() != params.size())
    throw ContractError("Sgd::Step: parameter list changed between steps");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param &p = *params[i];
    auto v = velocities_[i].Data();
    auto w = p.value.Data();
    auto g = p.grad.Data();
    for (std::size_t j = 0; j < w.size(); ++j) {
      v[j] = cfg_.momentum * v[j] + (g[j] + cfg_.weight_decay * w[j]);
      w[j] -= lr * v[j];
    }
    p.ZeroGrad();
  }
}

std::string PoolingName(PoolingKind p) { return p == PoolingKind::kTap ? "tap" : "lde"; }

PoolingKind ParsePooling(const std::string &name) {
  if (name == "tap") return PoolingKind::kTap;
  if (name == "lde") return PoolingKind::kLde;
  throw ConfigError("unknown pooling '" + name + "' (expected tap or lde)");
}

LdeConfig ModelSpec::EffectiveLde() const {
  LdeConfig cfg = lde;
  cfg.feature_dim = frontend.OutputDim();
  return cfg;
}

void ModelSpec::Validate() const {
  frontend.Validate();
  if (num_classes < 2) throw ConfigError("model: num_classes must be >= 2");
  if (pooling == PoolingKind::kLde) EffectiveLde().Validate();
}

std::size_t ModelSpec::EmbeddingDim() const {
  const std::size_t d = frontend.OutputDim();
  return pooling == PoolingKind::kTap ? d : d * lde.num_components;
}

Model::Model(const ModelSpec &spec)
    : spec_(spec), lde_(spec.EffectiveLde()), frontend_(spec.frontend) {
  spec_.Validate();
  if (spec_.pooling == PoolingKind::kLde) dict_ = Dictionary(lde_);
  classifier_ = LinearClassifier(spec_.num_classes, spec_.EmbeddingDim());
}

Model::Model(const ModelSpec &spec, const Rng &rng) : spec_(spec), lde_(spec.EffectiveLde()) {
  spec_.Validate();
  Rng front_rng = rng.Split("frontend");
  frontend_ = Frontend(spec_.frontend, &front_rng);
  if (spec_.pooling == PoolingKind::kLde) {
    Rng dict_rng = rng.Split("dictionary");
    dict_ = spec_.center_init == CenterInit::kUniform ? Dictionary::RandomInit(lde_, &dict_rng)
                                                      : Dictionary(lde_);
  }
  Rng cls_rng = rng.Split("classifier");
  classifier_ = LinearClassifier(spec_.num_classes, spec_.EmbeddingDim(), &cls_rng);
}

Vector Model::Embed(const FeatureSequence &x) const {
  FrontendOutput fo = frontend_.Forward(x);
  if (spec_.pooling == PoolingKind::kTap) return TapForward(fo.y);
  LdeResult r = LdeForward(fo.y, dict_, lde_);
  return r.encoded.e.Storage();
}

Vector Model::Scores(const FeatureSequence &x) const { return classifier_.Forward(Embed(x)); }

double Model::AccumulateGradient(const FeatureSequence &x, std::size_t label, double scale) {
  FrontendOutput fo = frontend_.Forward(x);
  const std::size_t len = fo.y.NumCols();
  Matrix grad_y;
  if (spec_.pooling == PoolingKind::kTap) {
    Vector e = TapForward(fo.y);
    CrossEntropyResult ce = CrossEntropy(classifier_.Forward(e), label);
    for (double &g : ce.grad) g *= scale;
    grad_y = TapBackward(classifier_.Backward(e, ce.grad), len);
    frontend_.Backward(fo.saved, grad_y);
    return ce.loss;
  }
  LdeResult r = LdeForward(fo.y, dict_, lde_);
  std::span<const double> e = r.encoded.Flat();
  CrossEntropyResult ce = CrossEntropy(classifier_.Forward(e), label);
  for (double &g : ce.grad) g *= scale;
  Matrix grad_e(lde_.num_components, lde_.feature_dim, classifier_.Backward(e, ce.grad));
  grad_y = LdeBackward(r.saved, grad_e, &dict_, lde_);
  frontend_.Backward(fo.saved, grad_y);
  return ce.loss;
}

std::vector<std::pair<std::string, Param *>> Model::NamedParams() {
  auto out = frontend_.Params();
  if (spec_.pooling == PoolingKind::kLde) {
    out.emplace_back("lde.centers", &dict_.centers);
    out.emplace_back("lde.raw_smoothing", &dict_.raw_smoothing);
  }
  out.emplace_back("classifier.weight", &classifier_.weight);
  out.emplace_back("classifier.bias", &classifier_.bias);
  return out;
}

std::vector<Param *> Model::TrainableParams() {
  std::vector<Param *> out;
  for (auto &[name, p] : frontend_.Params()) out.push_back(p);
  if (spec_.pooling == PoolingKind::kLde) {
    if (!spec_.freeze_centers) out.push_back(&dict_.centers);
    if (lde_.smoothing == SmoothingMode::kPerComponent) out.push_back(&dict_.raw_smoothing);
  }
  out.push_back(&classifier_.weight);
  out.push_back(&classifier_.bias);
  return out;
}

void Model::ZeroGrad() {
  for (auto &[name, p] : NamedParams()) p->ZeroGrad();
}

void TrainConfig::Validate() const {
  sgd.Validate();
  if (batch_size == 0) throw ConfigError("train: batch_size must be >= 1");
  if (crop.crop_min < 1 || crop.crop_min > crop.crop_max)
    throw ConfigError("train: need 1 <= crop_min <= crop_max");
  if (smooth_window == 0) throw ConfigError("train: smooth_window must be >= 1");
}

std::vector<double> SmoothLosses(std::span<const double> losses, std::size_t window) {
  std::vector<double> out(losses.size());
  for (std::size_t i = 0; i < losses.size(); ++i) {
    const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
    double s = 0.0;
    for (std::size_t j = lo; j <= i; ++j) s += losses[j];
    out[i] = s / static_cast<double>(i + 1 - lo);
  }
  return out;
}

std::string FormatLossLog(const std::vector<LossRecord> &log) {
  std::string out;
  char buf[96];
  for (const auto &r : log) {
    std::snprintf(buf, sizeof(buf), "%zu\t%.17g\t%.17g\n", r.step, r.loss, r.smoothed);
    out += buf;
  }
  return out;
}

Model InitialModel(const ModelSpec &spec, std::uint64_t seed) {
  return Model(spec, Rng(seed).Split("init"));
}

TrainResult TrainModel(const Corpus &corpus, const ModelSpec &spec, const TrainConfig &cfg,
                       const EpochCallback &on_epoch) {
  cfg.Validate();
  if (corpus.utterances.empty()) throw ArgumentError("TrainModel: empty training corpus");
  if (corpus.feature_dim != spec.frontend.input_dim)
    throw DimensionError("TrainModel: corpus dim " + std::to_string(corpus.feature_dim) +
                         " != frontend input dim " + std::to_string(spec.frontend.input_dim));
  if (corpus.num_classes != spec.num_classes)
    throw DimensionError("TrainModel: corpus has " + std::to_string(corpus.num_classes) +
                         " classes, model " + std::to_string(spec.num_classes));
  if (cfg.crop.crop_min < spec.frontend.MinInputLength())
    throw ConfigError("train: crop_min below the frontend minimum length");

  const Rng root(cfg.seed);
  TrainResult result;
  result.model = InitialModel(spec, cfg.seed);
  Model &model = result.model;
  const std::vector<Param *> trainable = model.TrainableParams();
  Sgd sgd(cfg.sgd);
  BatchIterator batches(corpus.utterances, cfg.batch_size, cfg.crop, root.Split("batches"));

  std::vector<double> losses;
  model.ZeroGrad();
  for (std::size_t epoch = 0; epoch < cfg.sgd.epochs; ++epoch) {
    const double lr = cfg.sgd.LrAt(epoch);
    batches.StartEpoch();
    Batch batch;
    double epoch_loss = 0.0;
    std::size_t epoch_steps = 0;
    while (batches.Next(&batch)) {
      const double scale = 1.0 / static_cast<double>(batch.features.size());
      double loss = 0.0;
      for (std::size_t i = 0; i < batch.features.size(); ++i)
        loss += model.AccumulateGradient(batch.features[i], batch.labels[i], scale);
      loss *= scale;
      if (!std::isfinite(loss)) {
        char msg[128];
        std::snprintf(msg, sizeof(msg), "training diverged: loss %g at step %zu (epoch %zu, lr %g)",
                      loss, losses.size(), epoch, lr);
        throw NumericalError(msg);
      }
      sgd.Step(trainable, lr);
      model.ZeroGrad();  // frozen parameters still collect gradients
      losses.push_back(loss);
      LossRecord rec;
      rec.step = losses.size() - 1;
      rec.loss = loss;
      const std::size_t lo = losses.size() >= cfg.smooth_window ? losses.size() - cfg.smooth_window : 0;
      double s = 0.0;
      for (std::size_t j = lo; j < losses.size(); ++j) s += losses[j];
      rec.smoothed = s / static_cast<double>(losses.size() - lo);
      result.log.push_back(rec);
      epoch_loss += loss;
      ++epoch_steps;
    }
    result.epochs_done = epoch + 1;
    const double mean = epoch_loss / static_cast<double>(epoch_steps);
    spdlog::debug("epoch {} lr {} mean loss {:.6f}", epoch, lr, mean);
    if (on_epoch) on_epoch(epoch, lr, mean);
  }
  result.data_rng = batches.rng();
  return result;
}

LinearClassifier TrainLinear(const std::vector<Vector> &inputs,
                             const std::vector<std::size_t> &labels, std::size_t num_classes,
                             const SgdConfig &sgd_cfg, std::size_t batch_size, Rng rng) {
  sgd_cfg.Validate();
  if (inputs.empty() || inputs.size() != labels.size())
    throw ArgumentError("TrainLinear: need one label per input and at least one input");
  if (batch_size == 0) throw ArgumentError("TrainLinear: batch_size must be >= 1");
  Rng init = rng.Split("init");
  LinearClassifier cls(num_classes, inputs[0].size(), &init);
  Rng order_rng = rng.Split("order");
  std::vector<Param *> params = {&cls.weight, &cls.bias};
  Sgd sgd(sgd_cfg);
  std::vector<std::size_t> order(inputs.size());
  for (std::size_t epoch = 0; epoch < sgd_cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Shuffle(&order_rng, std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const Vector &e = inputs[order[i]];
        CrossEntropyResult ce = CrossEntropy(cls.Forward(e), labels[order[i]]);
        if (!std::isfinite(ce.loss)) throw NumericalError("TrainLinear: loss is not finite");
        for (double &g : ce.grad) g *= scale;
        cls.Backward(e, ce.grad);
      }
      sgd.Step(params, sgd_cfg.LrAt(epoch));
    }
  }
  return cls;
}

}  // namespace lde
