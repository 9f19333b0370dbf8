// src/eval.cc

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

#include "lde/eval.h"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "lde/binary_io.h"
#include "lde/error.h"

namespace lde {

void TrialSet::Validate() const {
  const std::size_t K = NumClasses();
  std::unordered_set<std::string> seen;
  for (const auto &t : trials) {
    if (!seen.insert(t.id).second) throw ArgumentError("duplicate trial id '" + t.id + "'");
    if (t.label >= K) throw ArgumentError("trial '" + t.id + "' has an out-of-range label");
    if (t.scores.size() != K)
      throw ArgumentError("trial '" + t.id + "' has " + std::to_string(t.scores.size()) +
                          " scores for " + std::to_string(K) + " classes");
    if (!AllFinite(t.scores)) throw ArgumentError("trial '" + t.id + "' has a non-finite score");
  }
}

std::vector<std::string> DefaultClassNames(std::size_t num_classes) {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < num_classes; ++k) names.push_back("lang" + std::to_string(k));
  return names;
}

std::vector<DetPoint> DetCurve(std::span<const double> target,
                               std::span<const double> nontarget) {
  std::vector<double> tar(target.begin(), target.end()), non(nontarget.begin(), nontarget.end());
  std::sort(tar.begin(), tar.end());
  std::sort(non.begin(), non.end());
  std::vector<double> all = tar;
  all.insert(all.end(), non.begin(), non.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  const double nt = static_cast<double>(tar.size()), nn = static_cast<double>(non.size());
  std::vector<DetPoint> points;
  points.push_back({-std::numeric_limits<double>::infinity(), 0.0, 1.0});
  std::size_t it = 0, in = 0;
  for (double s : all) {
    while (it < tar.size() && tar[it] <= s) ++it;
    while (in < non.size() && non[in] <= s) ++in;
    points.push_back({s, static_cast<double>(it) / nt, static_cast<double>(non.size() - in) / nn});
  }
  return points;
}

double Eer(std::span<const double> target, std::span<const double> nontarget) {
  if (target.empty() || nontarget.empty())
    throw ArgumentError("EER needs at least one target and one non-target trial");
  std::vector<DetPoint> pts = DetCurve(target, nontarget);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].p_miss < pts[i].p_fa) continue;
    const double d0 = pts[i - 1].p_fa - pts[i - 1].p_miss;  // > 0
    const double d1 = pts[i].p_fa - pts[i].p_miss;          // <= 0
    const double alpha = d0 / (d0 - d1);
    return pts[i - 1].p_miss + alpha * (pts[i].p_miss - pts[i - 1].p_miss);
  }
  throw ContractError("EER: operating points never cross");
}

double ClassEer(const TrialSet &trials, std::size_t k) {
  std::vector<double> tar, non;
  for (const auto &t : trials.trials) (t.label == k ? tar : non).push_back(t.scores[k]);
  if (tar.empty() || non.empty())
    throw ArgumentError("class " + std::to_string(k) + " needs target and non-target trials");
  return Eer(tar, non);
}

EerSummary ComputeEer(const TrialSet &trials) {
  trials.Validate();
  const std::size_t K = trials.NumClasses();
  if (K < 2) throw ArgumentError("EER needs at least two classes");
  EerSummary out;
  std::vector<double> tar, non;
  for (std::size_t k = 0; k < K; ++k) {
    out.per_class.push_back(ClassEer(trials, k));
    out.averaged += out.per_class.back();
  }
  out.averaged /= static_cast<double>(K);
  for (const auto &t : trials.trials)
    for (std::size_t k = 0; k < K; ++k) (t.label == k ? tar : non).push_back(t.scores[k]);
  out.pooled = Eer(tar, non);
  return out;
}

CavgResult ComputeCavg(const TrialSet &trials) {
  trials.Validate();
  const std::size_t K = trials.NumClasses();
  if (K < 2) throw ArgumentError("Cavg needs at least two classes");
  std::vector<double> count(K, 0.0);
  CavgResult out;
  out.p_miss.assign(K, 0.0);
  out.p_fa = Matrix(K, K);
  out.pair_cost = Matrix(K, K);
  for (const auto &t : trials.trials) {
    const std::size_t y = t.label;
    count[y] += 1.0;
    bool miss = false;
    for (std::size_t n = 0; n < K; ++n)
      if (n != y && t.scores[y] - t.scores[n] <= 0.0) miss = true;
    if (miss) out.p_miss[y] += 1.0;
    for (std::size_t tt = 0; tt < K; ++tt)
      if (tt != y && t.scores[tt] - t.scores[y] > 0.0) out.p_fa(tt, y) += 1.0;
  }
  for (std::size_t k = 0; k < K; ++k)
    if (count[k] == 0.0)
      throw ArgumentError("Cavg: class '" + trials.class_names[k] + "' has no trials");
  for (std::size_t t = 0; t < K; ++t) {
    out.p_miss[t] /= count[t];
    for (std::size_t n = 0; n < K; ++n) out.p_fa(t, n) /= count[n];
  }
  double total = 0.0;
  for (std::size_t t = 0; t < K; ++t)
    for (std::size_t n = 0; n < K; ++n) {
      if (t == n) continue;
      out.pair_cost(t, n) = 0.5 * out.p_miss[t] + 0.5 * out.p_fa(t, n);
      total += out.pair_cost(t, n);
    }
  out.cavg = total / static_cast<double>(K * (K - 1));
  return out;
}

void CheckAligned(const std::vector<TrialSet> &systems) {
  if (systems.empty()) throw ArgumentError("fusion needs at least one system");
  const TrialSet &ref = systems[0];
  for (std::size_t s = 1; s < systems.size(); ++s) {
    const TrialSet &other = systems[s];
    if (other.class_names != ref.class_names)
      throw AlignmentError("system " + std::to_string(s) + " has different classes");
    if (other.trials.size() != ref.trials.size())
      throw AlignmentError("system " + std::to_string(s) + " has " +
                           std::to_string(other.trials.size()) + " trials, expected " +
                           std::to_string(ref.trials.size()));
    for (std::size_t i = 0; i < ref.trials.size(); ++i)
      if (other.trials[i].id != ref.trials[i].id || other.trials[i].label != ref.trials[i].label)
        throw AlignmentError("system " + std::to_string(s) + " trial " + std::to_string(i) +
                             " is '" + other.trials[i].id + "', expected '" +
                             ref.trials[i].id + "'");
  }
}

TrialSet Fuse(const std::vector<TrialSet> &systems, const FusionWeights &w) {
  CheckAligned(systems);
  const std::size_t K = systems[0].NumClasses();
  if (w.weights.size() != systems.size() || w.bias.size() != K)
    throw ArgumentError("fusion weights do not match the systems");
  TrialSet out;
  out.class_names = systems[0].class_names;
  for (std::size_t i = 0; i < systems[0].trials.size(); ++i) {
    TrialScore t;
    t.id = systems[0].trials[i].id;
    t.label = systems[0].trials[i].label;
    t.scores.assign(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      double v = 0.0;
      for (std::size_t s = 0; s < systems.size(); ++s) v += w.weights[s] * systems[s].trials[i].scores[k];
      t.scores[k] = v + w.bias[k];
    }
    out.trials.push_back(std::move(t));
  }
  return out;
}

namespace {

// Loss and gradient packed as [weights..., bias...].
double FusionLossGrad(const std::vector<TrialSet> &systems, const FusionWeights &w, Vector *grad) {
  const std::size_t S = systems.size(), K = systems[0].NumClasses();
  const std::size_t n = systems[0].trials.size();
  if (grad) grad->assign(S + K, 0.0);
  double loss = 0.0;
  Vector fused(K), p(K);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      double v = 0.0;
      for (std::size_t s = 0; s < S; ++s) v += w.weights[s] * systems[s].trials[i].scores[k];
      fused[k] = v + w.bias[k];
    }
    const double lse = LogSumExp(fused);
    const std::size_t y = systems[0].trials[i].label;
    loss += lse - fused[y];
    if (!grad) continue;
    for (std::size_t k = 0; k < K; ++k) p[k] = std::exp(fused[k] - lse) - (k == y ? 1.0 : 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      double g = 0.0;
      for (std::size_t k = 0; k < K; ++k) g += p[k] * systems[s].trials[i].scores[k];
      (*grad)[s] += g;
    }
    for (std::size_t k = 0; k < K; ++k) (*grad)[S + k] += p[k];
  }
  const double inv = 1.0 / static_cast<double>(n);
  if (grad)
    for (double &g : *grad) g *= inv;
  return loss * inv;
}

FusionWeights Step(const FusionWeights &w, const Vector &grad, double step) {
  FusionWeights out = w;
  const std::size_t S = w.weights.size();
  for (std::size_t s = 0; s < S; ++s) out.weights[s] -= step * grad[s];
  for (std::size_t k = 0; k < w.bias.size(); ++k) out.bias[k] -= step * grad[S + k];
  return out;
}

}  // namespace

double FusionLoss(const std::vector<TrialSet> &systems, const FusionWeights &w) {
  CheckAligned(systems);
  if (systems[0].trials.empty()) throw ArgumentError("fusion needs trials");
  return FusionLossGrad(systems, w, nullptr);
}

FusionResult TrainFusion(const std::vector<TrialSet> &systems, const FusionOptions &opts) {
  CheckAligned(systems);
  for (const auto &s : systems) s.Validate();
  const std::size_t S = systems.size(), K = systems[0].NumClasses();
  std::vector<std::size_t> per_class(K, 0);
  for (const auto &t : systems[0].trials) ++per_class[t.label];
  for (std::size_t k = 0; k < K; ++k)
    if (per_class[k] < 2)
      throw ArgumentError("fusion training needs at least two trials of class '" +
                          systems[0].class_names[k] + "'");

  FusionResult res;
  res.weights.weights.assign(S, 1.0 / static_cast<double>(S));
  res.weights.bias.assign(K, 0.0);
  Vector grad;
  res.loss = FusionLossGrad(systems, res.weights, &grad);
  double step = opts.initial_step;
  for (std::size_t iter = 0; iter < opts.max_iters; ++iter) {
    const double gnorm2 = Dot(grad, grad);
    if (std::sqrt(gnorm2) < opts.tolerance) {
      res.converged = true;
      break;
    }
    // Backtracking until the Armijo condition holds.
    FusionWeights trial;
    double trial_loss = 0.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings, step *= 0.5) {
      trial = Step(res.weights, grad, step);
      trial_loss = FusionLossGrad(systems, trial, nullptr);
      if (std::isfinite(trial_loss) && trial_loss <= res.loss - 1e-4 * step * gnorm2) {
        accepted = true;
        break;
      }
    }
    res.iterations = iter + 1;
    if (!accepted) break;  // no descent possible at machine precision
    res.weights = trial;
    res.loss = FusionLossGrad(systems, res.weights, &grad);
    step *= 2.0;
  }
  if (!res.converged && std::sqrt(Dot(grad, grad)) < opts.tolerance) res.converged = true;
  if (!res.converged && opts.max_iters > 0)
    spdlog::warn("fusion training stopped after {} iterations without convergence "
                 "(gradient norm {:.3g}); using the best weights found",
                 res.iterations, std::sqrt(Dot(grad, grad)));
  return res;
}

std::string FormatScores(const TrialSet &trials) {
  trials.Validate();
  std::string out;
  char buf[64];
  for (const auto &t : trials.trials) {
    out += t.id;
    out += '\t';
    out += trials.class_names[t.label];
    out += '\t';
    for (std::size_t k = 0; k < t.scores.size(); ++k) {
      if (k) out += ',';
      std::snprintf(buf, sizeof(buf), "%.17g", t.scores[k]);
      out += trials.class_names[k];
      out += ':';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string> Split(const std::string &s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

TrialSet ParseScores(const std::string &text, const std::string &context) {
  TrialSet out;
  std::unordered_map<std::string, std::size_t> index;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = context + ":" + std::to_string(lineno);
    std::vector<std::string> fields = Split(line, '\t');
    if (fields.size() != 3) throw FormatError(where + ": expected 3 tab-separated fields");
    std::vector<std::string> entries = Split(fields[2], ',');
    std::vector<std::string> names;
    TrialScore t;
    t.id = fields[0];
    for (const auto &e : entries) {
      const std::size_t colon = e.rfind(':');
      if (colon == std::string::npos || colon == 0)
        throw FormatError(where + ": bad class:score entry '" + e + "'");
      names.push_back(e.substr(0, colon));
      const std::string num = e.substr(colon + 1);
      char *end = nullptr;
      errno = 0;
      const double v = std::strtod(num.c_str(), &end);
      if (num.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
        throw FormatError(where + ": bad score '" + num + "'");
      t.scores.push_back(v);
    }
    if (out.class_names.empty()) {
      out.class_names = names;
      for (std::size_t k = 0; k < names.size(); ++k)
        if (!index.emplace(names[k], k).second)
          throw FormatError(where + ": class '" + names[k] + "' listed twice");
    } else if (names != out.class_names) {
      throw FormatError(where + ": class list differs from the first line");
    }
    auto it = index.find(fields[1]);
    if (it == index.end()) throw FormatError(where + ": unknown label '" + fields[1] + "'");
    t.label = it->second;
    out.trials.push_back(std::move(t));
  }
  try {
    out.Validate();
  } catch (const ArgumentError &e) {
    throw FormatError(context + ": " + e.what());
  }
  return out;
}

void WriteScores(const std::string &path, const TrialSet &trials) {
  const std::string text = FormatScores(trials);
  io::WriteFile(path, std::vector<char>(text.begin(), text.end()));
}

TrialSet ReadScores(const std::string &path) {
  std::vector<char> data = io::ReadFile(path);
  return ParseScores(std::string(data.begin(), data.end()), path);
}

TrialSet SelectTrials(const TrialSet &trials, const std::vector<std::string> &ids) {
  std::unordered_set<std::string> keep(ids.begin(), ids.end());
  TrialSet out;
  out.class_names = trials.class_names;
  for (const auto &t : trials.trials)
    if (keep.count(t.id)) out.trials.push_back(t);
  return out;
}

}  // namespace lde
