// src/encoding.cc

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

#include "lde/encoding.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lde/error.h"

namespace lde {

void LdeConfig::Validate() const {
  if (num_components < 1) throw ArgumentError("LdeConfig: num_components must be >= 1");
  if (feature_dim < 1) throw ArgumentError("LdeConfig: feature_dim must be >= 1");
  if (smoothing == SmoothingMode::kSharedBeta && !(beta > 0.0 && std::isfinite(beta)))
    throw ArgumentError("LdeConfig: beta must be positive and finite");
}

double Softplus(double x) {
  double y = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  return std::max(y, std::numeric_limits<double>::min());
}

double InverseSoftplus(double y) {
  if (!(y > 0.0)) throw ArgumentError("InverseSoftplus: argument must be positive");
  // log(exp(y) - 1), rewritten to stay accurate for large and tiny y.
  return y > 30.0 ? y + std::log1p(-std::exp(-y)) : std::log(std::expm1(y));
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

Dictionary::Dictionary(const LdeConfig &cfg)
    : centers(Matrix(cfg.num_components, cfg.feature_dim)),
      raw_smoothing(Matrix(cfg.num_components, 1)) {
  cfg.Validate();
}

Dictionary Dictionary::RandomInit(const LdeConfig &cfg, Rng *rng) {
  Dictionary dict(cfg);
  const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.num_components));
  for (double &v : dict.centers.value.Data()) v = bound * (2.0 * rng->Uniform() - 1.0);
  for (std::size_t c = 0; c < cfg.num_components; ++c)
    dict.SetSmoothing(c, 1.0 - rng->Uniform());  // (0, 1]
  return dict;
}

double Dictionary::Smoothing(std::size_t c) const {
  return Softplus(raw_smoothing.value(c, 0));
}

void Dictionary::SetSmoothing(std::size_t c, double s) {
  raw_smoothing.value(c, 0) = InverseSoftplus(s);
}

namespace {

void CheckShapes(const FeatureSequence &x, const Dictionary &dict, const LdeConfig &cfg) {
  cfg.Validate();
  if (dict.NumComponents() != cfg.num_components || dict.FeatureDim() != cfg.feature_dim ||
      dict.raw_smoothing.value.NumRows() != cfg.num_components)
    throw DimensionError("LdeForward: dictionary shape does not match config");
  if (x.NumRows() != cfg.feature_dim)
    throw DimensionError("LdeForward: input has " + std::to_string(x.NumRows()) +
                         " rows, expected feature_dim " + std::to_string(cfg.feature_dim));
}

}  // namespace

LdeResult LdeForward(const FeatureSequence &x, const Dictionary &dict,
                     const LdeConfig &cfg) {
  CheckShapes(x, dict, cfg);
  const std::size_t L = x.NumCols(), C = cfg.num_components, D = cfg.feature_dim;
  if (L == 0) throw EmptySequenceError("LdeForward: empty input sequence");

  LdeResult result;
  LdeSaved &saved = result.saved;
  saved.length = L;
  saved.num_components = C;
  saved.feature_dim = D;
  saved.smoothing.resize(C);
  for (std::size_t c = 0; c < C; ++c)
    saved.smoothing[c] =
        cfg.smoothing == SmoothingMode::kSharedBeta ? cfg.beta : dict.Smoothing(c);

  const Matrix frames = Transpose(x);  // L x D, contiguous per frame
  const Matrix &mu = dict.centers.value;
  saved.residuals.resize(L * C * D);
  Matrix logits(L, C);
  for (std::size_t t = 0; t < L; ++t) {
    auto xt = frames.Row(t);
    for (std::size_t c = 0; c < C; ++c) {
      auto mc = mu.Row(c);
      double *r = &saved.residuals[(t * C + c) * D];
      double dist = 0.0;
      for (std::size_t d = 0; d < D; ++d) {
        r[d] = xt[d] - mc[d];
        dist += r[d] * r[d];
      }
      logits(t, c) = -saved.smoothing[c] * dist;
    }
  }
  saved.weights = SoftmaxRows(logits);

  Matrix agg(C, D);
  saved.denominators.assign(C, 0.0);
  saved.floored.assign(C, false);
  for (std::size_t t = 0; t < L; ++t) {
    for (std::size_t c = 0; c < C; ++c) {
      const double w = saved.weights(t, c);
      const double *r = &saved.residuals[(t * C + c) * D];
      auto ac = agg.Row(c);
      for (std::size_t d = 0; d < D; ++d) ac[d] += w * r[d];
      saved.denominators[c] += w;
    }
  }
  EncodedVector &enc = result.encoded;
  for (std::size_t c = 0; c < C; ++c) {
    double &z = saved.denominators[c];
    if (cfg.aggregation == AggregationMode::kMean) {
      z = static_cast<double>(L);
    } else if (z < kTinyDenominator) {
      z = kTinyDenominator;
      saved.floored[c] = true;
      enc.any_floored = true;
    }
    for (double &v : agg.Row(c)) v /= z;
  }
  saved.aggregated = agg;

  saved.length_normalized = cfg.length_normalize;
  if (cfg.length_normalize) {
    NormalizedVector nv = LengthNormalize(agg.Data());
    saved.norm = Norm2(agg.Data());
    saved.zero_norm = nv.zero_norm;
    enc.zero_norm = nv.zero_norm;
    enc.e = Matrix(C, D, std::move(nv.v));
  } else {
    enc.e = std::move(agg);
  }
  return result;
}

Matrix LdeBackward(const LdeSaved &saved, const Matrix &grad_out, Dictionary *dict,
                   const LdeConfig &cfg) {
  const std::size_t L = saved.length, C = saved.num_components, D = saved.feature_dim;
  if (grad_out.NumRows() != C || grad_out.NumCols() != D)
    throw ContractError("LdeBackward: grad_out shape does not match saved forward");
  if (dict->NumComponents() != C || dict->FeatureDim() != D || cfg.num_components != C ||
      cfg.feature_dim != D || saved.length_normalized != cfg.length_normalize ||
      saved.weights.NumRows() != L)
    throw ContractError("LdeBackward: dictionary/config do not match saved forward");

  // Through the length normalization: y = v/|v|, dl/dv = (g - y (y.g)) / |v|.
  Matrix g = grad_out;
  if (saved.length_normalized && !saved.zero_norm) {
    const double inv = 1.0 / saved.norm;
    double yg = 0.0;
    auto v = saved.aggregated.Data();
    auto gd = g.Data();
    for (std::size_t i = 0; i < gd.size(); ++i) yg += v[i] * inv * gd[i];
    for (std::size_t i = 0; i < gd.size(); ++i) gd[i] = (gd[i] - v[i] * inv * yg) * inv;
  }

  // Through the aggregation. Mean mode: e_c = sum_t w r / L, so
  // dl/dw_tc = G_c.r_tc / L. Normalized mode: e_c = A_c / Z_c with
  // Z_c = sum_t w_tc, giving dl/dw_tc = G_c.(r_tc - e_c) / Z_c, unless the
  // denominator was floored (then Z_c is a constant).
  const bool normalized = cfg.aggregation == AggregationMode::kNormalized;
  Matrix grad_w(L, C);
  std::vector<double> grad_r(L * C * D);
  for (std::size_t t = 0; t < L; ++t) {
    for (std::size_t c = 0; c < C; ++c) {
      const double inv_z = 1.0 / saved.denominators[c];
      const double w = saved.weights(t, c);
      const double *r = &saved.residuals[(t * C + c) * D];
      const double *e = saved.aggregated.Row(c).data();
      auto gc = g.Row(c);
      double gw = 0.0;
      double *gr = &grad_r[(t * C + c) * D];
      const bool through_z = normalized && !saved.floored[c];
      for (std::size_t d = 0; d < D; ++d) {
        gw += gc[d] * (through_z ? r[d] - e[d] : r[d]);
        gr[d] = w * gc[d] * inv_z;
      }
      grad_w(t, c) = gw * inv_z;
    }
  }

  // Through the softmax over components and the logits a_tc = -s_c |r_tc|^2.
  Vector grad_s(C, 0.0);
  for (std::size_t t = 0; t < L; ++t) {
    double wg = 0.0;
    for (std::size_t c = 0; c < C; ++c) wg += saved.weights(t, c) * grad_w(t, c);
    for (std::size_t c = 0; c < C; ++c) {
      const double ga = saved.weights(t, c) * (grad_w(t, c) - wg);
      if (ga == 0.0) continue;
      const double *r = &saved.residuals[(t * C + c) * D];
      double dist = 0.0;
      for (std::size_t d = 0; d < D; ++d) dist += r[d] * r[d];
      grad_s[c] -= dist * ga;
      const double gdist = -saved.smoothing[c] * ga;
      double *gr = &grad_r[(t * C + c) * D];
      for (std::size_t d = 0; d < D; ++d) gr[d] += 2.0 * r[d] * gdist;
    }
  }

  // r_tc = x_t - mu_c.
  Matrix grad_x(D, L);
  Matrix &grad_mu = dict->centers.grad;
  for (std::size_t t = 0; t < L; ++t) {
    for (std::size_t c = 0; c < C; ++c) {
      const double *gr = &grad_r[(t * C + c) * D];
      auto gm = grad_mu.Row(c);
      for (std::size_t d = 0; d < D; ++d) {
        grad_x(d, t) += gr[d];
        gm[d] -= gr[d];
      }
    }
  }

  if (cfg.smoothing == SmoothingMode::kPerComponent) {
    for (std::size_t c = 0; c < C; ++c)
      dict->raw_smoothing.grad(c, 0) += grad_s[c] * Sigmoid(dict->raw_smoothing.value(c, 0));
  }
  return grad_x;
}

Vector TapForward(const FeatureSequence &x) {
  const std::size_t L = x.NumCols();
  if (L == 0) throw EmptySequenceError("TapForward: empty input sequence");
  Vector mean(x.NumRows(), 0.0);
  for (std::size_t d = 0; d < x.NumRows(); ++d) {
    double s = 0.0;
    for (double v : x.Row(d)) s += v;
    mean[d] = s / static_cast<double>(L);
  }
  return mean;
}

Matrix TapBackward(std::span<const double> grad_out, std::size_t length) {
  if (length == 0) throw EmptySequenceError("TapBackward: empty input sequence");
  Matrix g(grad_out.size(), length);
  for (std::size_t d = 0; d < grad_out.size(); ++d) {
    const double v = grad_out[d] / static_cast<double>(length);
    for (double &x : g.Row(d)) x = v;
  }
  return g;
}

NormalizedVector LengthNormalize(std::span<const double> v) {
  NormalizedVector out;
  out.v.assign(v.begin(), v.end());
  const double n = Norm2(v);
  if (n > kTinyDenominator) {
    for (double &x : out.v) x /= n;
  } else {
    out.zero_norm = true;
  }
  return out;
}

std::vector<std::size_t> HardAssign(const FeatureSequence &x, const Dictionary &dict) {
  const std::size_t L = x.NumCols(), C = dict.NumComponents(), D = dict.FeatureDim();
  if (L == 0) throw EmptySequenceError("HardAssign: empty input sequence");
  if (x.NumRows() != D) throw DimensionError("HardAssign: feature dim mismatch");
  std::vector<std::size_t> idx(L, 0);
  for (std::size_t t = 0; t < L; ++t) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < C; ++c) {
      double dist = 0.0;
      for (std::size_t d = 0; d < D; ++d) {
        const double r = x(d, t) - dict.centers.value(c, d);
        dist += r * r;
      }
      if (dist < best) {  // strict: first minimum wins ties
        best = dist;
        idx[t] = c;
      }
    }
  }
  return idx;
}

}  // namespace lde
