// src/gmm.cc

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

#include "lde/gmm.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "lde/error.h"

namespace lde {

GmmModel::GmmModel(Vector weights, Matrix means, Matrix variances)
    : weights_(std::move(weights)), means_(std::move(means)), variances_(std::move(variances)) {
  Validate();
  ComputeConstants();
}

void GmmModel::Validate() const {
  const std::size_t C = weights_.size();
  if (C == 0) throw ArgumentError("GmmModel: no components");
  if (means_.NumRows() != C || !means_.SameShape(variances_) || means_.NumCols() == 0)
    throw DimensionError("GmmModel: weights/means/variances shapes disagree");
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0)) throw ArgumentError("GmmModel: weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ArgumentError("GmmModel: weights do not sum to 1");
  for (double v : variances_.Data())
    if (!(v > 0.0) || !std::isfinite(v))
      throw ArgumentError("GmmModel: variances must be positive and finite");
  if (!AllFinite(means_.Data())) throw ArgumentError("GmmModel: non-finite mean");
}

void GmmModel::ComputeConstants() {
  const std::size_t C = NumComponents(), D = Dim();
  log_consts_.assign(C, 0.0);
  inv_vars_ = Matrix(C, D);
  for (std::size_t c = 0; c < C; ++c) {
    double s = std::log(weights_[c]);
    for (std::size_t d = 0; d < D; ++d) {
      s -= 0.5 * std::log(2.0 * std::numbers::pi * variances_(c, d));
      inv_vars_(c, d) = 1.0 / variances_(c, d);
    }
    log_consts_[c] = s;
  }
}

void GmmModel::ComponentLogLikes(std::span<const double> x, std::span<double> out) const {
  const std::size_t D = Dim();
  for (std::size_t c = 0; c < NumComponents(); ++c) {
    auto mu = means_.Row(c);
    auto iv = inv_vars_.Row(c);
    double q = 0.0;
    for (std::size_t d = 0; d < D; ++d) {
      const double r = x[d] - mu[d];
      q += r * r * iv[d];
    }
    out[c] = log_consts_[c] - 0.5 * q;
  }
}

namespace {

void CheckInput(const GmmModel &model, const FeatureSequence &x) {
  if (x.NumRows() != model.Dim())
    throw DimensionError("GMM: input dim " + std::to_string(x.NumRows()) +
                         " does not match model dim " + std::to_string(model.Dim()));
  if (x.NumCols() == 0) throw EmptySequenceError("GMM: empty input sequence");
}

// Posteriors of one frame into `post`, returns log p(x).
double FramePosterior(const GmmModel &model, std::span<const double> x, std::span<double> post) {
  model.ComponentLogLikes(x, post);
  const double lse = LogSumExp(post);
  for (double &p : post) p = std::exp(p - lse);
  return lse;
}

// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0, comp = 0.0;
  void Add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  double Value() const { return sum + comp; }
};

}  // namespace

Matrix Posteriors(const GmmModel &model, const FeatureSequence &x) {
  CheckInput(model, x);
  const Matrix frames = Transpose(x);
  Matrix post(frames.NumRows(), model.NumComponents());
  for (std::size_t t = 0; t < frames.NumRows(); ++t)
    FramePosterior(model, frames.Row(t), post.Row(t));
  return post;
}

Vector FrameLogLikelihoods(const GmmModel &model, const FeatureSequence &x) {
  CheckInput(model, x);
  const Matrix frames = Transpose(x);
  Vector ll(frames.NumRows());
  Vector tmp(model.NumComponents());
  for (std::size_t t = 0; t < frames.NumRows(); ++t) {
    model.ComponentLogLikes(frames.Row(t), tmp);
    ll[t] = LogSumExp(tmp);
  }
  return ll;
}

BaumWelchStats AccumulateStats(const GmmModel &model, const FeatureSequence &x) {
  CheckInput(model, x);
  const std::size_t C = model.NumComponents(), D = model.Dim();
  const Matrix frames = Transpose(x);
  BaumWelchStats stats{Vector(C, 0.0), Matrix(C, D)};
  Vector post(C);
  for (std::size_t t = 0; t < frames.NumRows(); ++t) {
    auto xt = frames.Row(t);
    FramePosterior(model, xt, post);
    for (std::size_t c = 0; c < C; ++c) {
      stats.n[c] += post[c];
      auto fc = stats.f.Row(c);
      auto mu = model.means().Row(c);
      for (std::size_t d = 0; d < D; ++d) fc[d] += post[c] * (xt[d] - mu[d]);
    }
  }
  return stats;
}

Supervector MakeSupervector(const BaumWelchStats &stats) {
  const std::size_t C = stats.n.size(), D = stats.f.NumCols();
  if (stats.f.NumRows() != C) throw DimensionError("MakeSupervector: n and f disagree");
  Supervector sv;
  sv.v.assign(C * D, 0.0);
  sv.unseen.assign(C, false);
  for (std::size_t c = 0; c < C; ++c) {
    if (!(stats.n[c] >= kTinyDenominator)) {
      sv.unseen[c] = true;
      continue;
    }
    for (std::size_t d = 0; d < D; ++d) sv.v[c * D + d] = stats.f(c, d) / stats.n[c];
  }
  sv.normalized = LengthNormalize(sv.v).v;
  return sv;
}

namespace {

double SqDist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return s;
}

// Seeded Lloyd iterations over frames (N x D). Returns hard assignments and
// fills `centers` (C x D).
std::vector<std::size_t> KMeans(const Matrix &frames, std::size_t C, std::size_t iters,
                                Rng *rng, Matrix *centers) {
  const std::size_t N = frames.NumRows(), D = frames.NumCols();
  std::vector<std::size_t> idx(N);
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates: the first C entries become distinct seeds.
  for (std::size_t i = 0; i < C; ++i) std::swap(idx[i], idx[i + rng->UniformInt(N - i)]);
  *centers = Matrix(C, D);
  for (std::size_t c = 0; c < C; ++c)
    std::copy_n(frames.Row(idx[c]).begin(), D, centers->Row(c).begin());

  std::vector<std::size_t> assign(N, 0);
  Vector best_dist(N);
  for (std::size_t it = 0; it <= iters; ++it) {
    for (std::size_t n = 0; n < N; ++n) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < C; ++c) {
        double dd = SqDist(frames.Row(n), centers->Row(c));
        if (dd < best) {
          best = dd;
          assign[n] = c;
        }
      }
      best_dist[n] = best;
    }
    if (it == iters) break;
    Matrix sums(C, D);
    std::vector<std::size_t> counts(C, 0);
    for (std::size_t n = 0; n < N; ++n) {
      ++counts[assign[n]];
      auto s = sums.Row(assign[n]);
      auto x = frames.Row(n);
      for (std::size_t d = 0; d < D; ++d) s[d] += x[d];
    }
    for (std::size_t c = 0; c < C; ++c) {
      if (counts[c] == 0) {
        // Empty cluster: move it onto the frame farthest from its center.
        std::size_t far = static_cast<std::size_t>(
            std::max_element(best_dist.begin(), best_dist.end()) - best_dist.begin());
        std::copy_n(frames.Row(far).begin(), D, centers->Row(c).begin());
        best_dist[far] = 0.0;
        continue;
      }
      for (std::size_t d = 0; d < D; ++d)
        (*centers)(c, d) = sums(c, d) / static_cast<double>(counts[c]);
    }
  }
  return assign;
}

}  // namespace

EmResult EmFit(const Matrix &frames_dn, std::size_t C, std::size_t iters, Rng *rng,
               const EmOptions &opts) {
  const std::size_t D = frames_dn.NumRows(), N = frames_dn.NumCols();
  if (C == 0) throw ArgumentError("EmFit: need at least one component");
  if (D == 0) throw ArgumentError("EmFit: feature dim must be >= 1");
  if (N < 10 * C)
    throw ArgumentError("EmFit: need at least " + std::to_string(10 * C) + " frames, got " +
                        std::to_string(N));
  const Matrix frames = Transpose(frames_dn);  // N x D

  Vector gmean(D, 0.0), gvar(D, 0.0);
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t d = 0; d < D; ++d) gmean[d] += frames(n, d);
  for (double &m : gmean) m /= static_cast<double>(N);
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t d = 0; d < D; ++d) {
      const double r = frames(n, d) - gmean[d];
      gvar[d] += r * r;
    }
  Vector floor(D);
  for (std::size_t d = 0; d < D; ++d) {
    gvar[d] /= static_cast<double>(N);
    floor[d] = opts.variance_floor_scale * gvar[d];
    if (!(floor[d] > 0.0)) floor[d] = std::numeric_limits<double>::min();
  }

  // k-means initialization.
  Matrix centers;
  std::vector<std::size_t> assign = KMeans(frames, C, opts.kmeans_iters, rng, &centers);
  Vector weights(C, 0.0);
  Matrix means = centers, vars(C, D);
  for (std::size_t n = 0; n < N; ++n) {
    const std::size_t c = assign[n];
    weights[c] += 1.0;
    for (std::size_t d = 0; d < D; ++d) {
      const double r = frames(n, d) - centers(c, d);
      vars(c, d) += r * r;
    }
  }
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t d = 0; d < D; ++d)
      vars(c, d) = weights[c] > 0.0 ? std::max(vars(c, d) / weights[c], floor[d]) : gvar[d];
    if (weights[c] == 0.0) weights[c] = 1.0;  // one pseudo-frame for an empty cluster
  }
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double &w : weights) w /= wsum;

  EmResult result;
  GmmModel model(weights, means, vars);
  Vector post(C);
  for (std::size_t it = 0; it <= iters; ++it) {
    // E-step, with statistics centered on the current means.
    Vector occ(C, 0.0);
    Matrix s1(C, D), s2(C, D);
    CompensatedSum total;
    for (std::size_t n = 0; n < N; ++n) {
      auto x = frames.Row(n);
      total.Add(FramePosterior(model, x, post));
      for (std::size_t c = 0; c < C; ++c) {
        const double g = post[c];
        if (g == 0.0) continue;
        occ[c] += g;
        auto mu = model.means().Row(c);
        auto a = s1.Row(c);
        auto b = s2.Row(c);
        for (std::size_t d = 0; d < D; ++d) {
          const double r = x[d] - mu[d];
          a[d] += g * r;
          b[d] += g * r * r;
        }
      }
    }
    result.log_likelihoods.push_back(total.Value());
    if (it == iters) break;

    // M-step.
    Vector new_w(C);
    Matrix new_mu(C, D), new_var(C, D);
    std::vector<std::size_t> empty;
    for (std::size_t c = 0; c < C; ++c) {
      if (occ[c] < opts.empty_threshold) {
        empty.push_back(c);
        continue;
      }
      new_w[c] = occ[c] / static_cast<double>(N);
      for (std::size_t d = 0; d < D; ++d) {
        const double shift = s1(c, d) / occ[c];
        new_mu(c, d) = model.means()(c, d) + shift;
        new_var(c, d) = std::max(s2(c, d) / occ[c] - shift * shift, floor[d]);
      }
    }
    for (std::size_t c : empty) {
      // Split the component with the largest total variance.
      std::size_t donor = 0;
      double best = -1.0;
      for (std::size_t k = 0; k < C; ++k) {
        if (occ[k] < opts.empty_threshold) continue;
        double tv = 0.0;
        for (std::size_t d = 0; d < D; ++d) tv += new_var(k, d);
        if (tv > best) {
          best = tv;
          donor = k;
        }
      }
      for (std::size_t d = 0; d < D; ++d) {
        const double sd = std::sqrt(new_var(donor, d));
        new_mu(c, d) = new_mu(donor, d) + 0.5 * sd * rng->Gaussian();
        new_var(c, d) = new_var(donor, d);
      }
      new_w[donor] *= 0.5;
      new_w[c] = new_w[donor];
      spdlog::warn("EmFit: component {} empty at iteration {}, re-seeded from component {}",
                   c, it, donor);
    }
    if (!empty.empty()) result.reseeded_at.push_back(it);
    const double ws = std::accumulate(new_w.begin(), new_w.end(), 0.0);
    for (double &w : new_w) w /= ws;
    model = GmmModel(new_w, new_mu, new_var);
  }
  result.model = std::move(model);
  return result;
}

Vector GmmClassify(const std::vector<GmmModel> &models, const FeatureSequence &x) {
  Vector scores;
  scores.reserve(models.size());
  for (const auto &m : models) {
    Vector ll = FrameLogLikelihoods(m, x);
    CompensatedSum s;
    for (double v : ll) s.Add(v);
    scores.push_back(s.Value() / static_cast<double>(ll.size()));
  }
  return scores;
}

}  // namespace lde
