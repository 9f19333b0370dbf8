// lde/eval.h

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

#ifndef LDE_EVAL_H_
#define LDE_EVAL_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lde/matrix.h"

namespace lde {

struct TrialScore {
  std::string id;
  std::size_t label = 0;
  Vector scores;  // one per class

  bool operator==(const TrialScore &) const = default;
};

struct TrialSet {
  std::vector<std::string> class_names;
  std::vector<TrialScore> trials;

  std::size_t NumClasses() const { return class_names.size(); }
  /// Throws ArgumentError on duplicate ids, bad labels, wrong score counts or
  /// non-finite scores.
  void Validate() const;

  bool operator==(const TrialSet &) const = default;
};

/// "lang0", "lang1", ...
std::vector<std::string> DefaultClassNames(std::size_t num_classes);

struct DetPoint {
  double threshold = 0.0;  // decisions accept score > threshold
  double p_miss = 0.0;
  double p_fa = 0.0;
};

/**
   Operating points of a detector: one below every score, then one at each
   distinct score. A score equal to the threshold is a rejection.
*/
std::vector<DetPoint> DetCurve(std::span<const double> target, std::span<const double> nontarget);

/**
   Equal error rate: the first operating point with P_miss >= P_fa, linearly
   interpolated with its predecessor. Throws ArgumentError unless both lists
   are non-empty.
*/
double Eer(std::span<const double> target, std::span<const double> nontarget);

/// One-vs-rest EER of class k on the raw class-k score.
double ClassEer(const TrialSet &trials, std::size_t k);

struct EerSummary {
  Vector per_class;
  double averaged = 0.0;  // mean of per_class
  double pooled = 0.0;    // all target and non-target trials in one list
};

/// Throws ArgumentError for fewer than two classes or a class without trials.
EerSummary ComputeEer(const TrialSet &trials);

/**
   Average pairwise detection cost with C_miss = C_fa = 1 and P_target = 0.5.

   P_miss(t) is the fraction of class-t trials where score_t - score_n <= 0
   for some n != t. P_fa(t, n) is the fraction of class-n trials where
   score_t - score_n > 0. C(t, n) = 0.5 P_miss(t) + 0.5 P_fa(t, n), and
   Cavg is the mean of C over ordered pairs t != n.
*/
struct CavgResult {
  Vector p_miss;    // K
  Matrix p_fa;      // K x K, p_fa(t, n), zero diagonal
  Matrix pair_cost; // K x K, zero diagonal
  double cavg = 0.0;
};

CavgResult ComputeCavg(const TrialSet &trials);

struct FusionWeights {
  Vector weights;  // one per system
  Vector bias;     // one per class

  bool operator==(const FusionWeights &) const = default;
};

/// Throws AlignmentError unless all systems list the same ids, labels and
/// classes in the same order.
void CheckAligned(const std::vector<TrialSet> &systems);

TrialSet Fuse(const std::vector<TrialSet> &systems, const FusionWeights &w);

struct FusionOptions {
  std::size_t max_iters = 1000;
  double tolerance = 1e-6;  // stop when the gradient norm falls below this
  double initial_step = 1.0;
};

struct FusionResult {
  FusionWeights weights;
  double loss = 0.0;  // mean cross-entropy of the returned weights
  std::size_t iterations = 0;
  bool converged = false;
};

/**
   Fits fusion weights by full-batch gradient descent with backtracking on the
   mean multiclass cross-entropy of the fused scores, starting from equal
   weights 1/S and zero bias. Without convergence the best weights seen are
   returned with a warning.
*/
FusionResult TrainFusion(const std::vector<TrialSet> &systems, const FusionOptions &opts = {});

/// Mean cross-entropy of the fused scores.
double FusionLoss(const std::vector<TrialSet> &systems, const FusionWeights &w);

/// Lines "id<TAB>label<TAB>class:score,..." with 17 significant digits.
std::string FormatScores(const TrialSet &trials);
TrialSet ParseScores(const std::string &text, const std::string &context);
void WriteScores(const std::string &path, const TrialSet &trials);
TrialSet ReadScores(const std::string &path);

/// Trials whose id is in `ids`, in their original order.
TrialSet SelectTrials(const TrialSet &trials, const std::vector<std::string> &ids);

}  // namespace lde

#endif  // LDE_EVAL_H_
