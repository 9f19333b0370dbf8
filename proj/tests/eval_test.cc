// tests/eval_test.cc

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

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "lde/error.h"
#include "lde/eval.h"
#include "lde/rng.h"
#include "metric_oracles.h"

namespace lde {

namespace {

TrialSet MakeTrials(std::size_t K, const std::vector<std::pair<std::size_t, Vector>> &rows) {
  TrialSet ts;
  ts.class_names = DefaultClassNames(K);
  for (std::size_t i = 0; i < rows.size(); ++i)
    ts.trials.push_back({"utt" + std::to_string(i), rows[i].first, rows[i].second});
  return ts;
}

// Scores = signal * onehot(label) + unit Gaussian noise.
TrialSet NoisySystem(Rng *rng, std::size_t n, std::size_t K, double signal,
                     const std::vector<std::size_t> &labels) {
  TrialSet ts;
  ts.class_names = DefaultClassNames(K);
  for (std::size_t i = 0; i < n; ++i) {
    TrialScore t{"t" + std::to_string(i), labels[i], Vector(K)};
    for (std::size_t k = 0; k < K; ++k) t.scores[k] = (k == t.label ? signal : 0.0) + rng->Gaussian();
    ts.trials.push_back(std::move(t));
  }
  return ts;
}

std::vector<std::size_t> RoundRobin(std::size_t n, std::size_t K) {
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i % K;
  return labels;
}

}  // namespace

TEST_CASE("eer hand cases") {
  CHECK(Eer(Vector{0.9, 0.6, 0.4}, Vector{0.7, 0.3, 0.1}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(Eer(Vector{3.0, 4.0}, Vector{1.0, 2.0}) == 0.0);
  CHECK(Eer(Vector{1.0, 2.0, 5.0}, Vector{5.0, 2.0, 1.0}) == 0.5);
  CHECK(Eer(Vector{7.0}, Vector{7.0}) == 0.5);
  CHECK(Eer(Vector{1.0, 2.0}, Vector{3.0, 4.0}) == 1.0);
  CHECK_THROWS_AS(Eer(Vector{}, Vector{1.0}), ArgumentError);
  CHECK_THROWS_AS(Eer(Vector{1.0}, Vector{}), ArgumentError);
}

TEST_CASE("eer matches a brute-force threshold sweep") {
  Rng rng(1);
  double worst = 0.0;
  for (int inst = 0; inst < 1000; ++inst) {
    const std::size_t nt = 1 + rng.UniformInt(30), nn = 1 + rng.UniformInt(30);
    const bool ties = inst % 3 == 0;
    Vector tar(nt), non(nn);
    const double shift = rng.Uniform() * 2.0;
    for (double &v : tar) v = ties ? std::round(3.0 * rng.Gaussian() + shift) : rng.Gaussian() + shift;
    for (double &v : non) v = ties ? std::round(3.0 * rng.Gaussian()) : rng.Gaussian();
    worst = std::max(worst, std::abs(Eer(tar, non) - testing::BruteForceEer(tar, non)));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("eer is invariant under increasing transforms") {
  Rng rng(2);
  for (int inst = 0; inst < 200; ++inst) {
    Vector tar(20), non(25);
    for (double &v : tar) v = rng.Gaussian() + 0.8;
    for (double &v : non) v = rng.Gaussian();
    const double base = Eer(tar, non);
    auto apply = [](Vector v, auto f) {
      for (double &x : v) x = f(x);
      return v;
    };
    auto cube = [](double x) { return x * x * x + x; };
    auto affine = [](double x) { return 2.5 * x - 7.0; };
    auto ex = [](double x) { return std::exp(x); };
    CHECK(std::abs(Eer(apply(tar, cube), apply(non, cube)) - base) <= 1e-12);
    CHECK(std::abs(Eer(apply(tar, affine), apply(non, affine)) - base) <= 1e-12);
    CHECK(std::abs(Eer(apply(tar, ex), apply(non, ex)) - base) <= 1e-12);
  }
}

TEST_CASE("det curve") {
  std::vector<DetPoint> pts = DetCurve(Vector{0.9, 0.6, 0.4}, Vector{0.7, 0.3, 0.1});
  REQUIRE(pts.size() == 7);
  CHECK(pts.front().p_miss == 0.0);
  CHECK(pts.front().p_fa == 1.0);
  CHECK(pts.back().p_miss == 1.0);
  CHECK(pts.back().p_fa == 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    CHECK(pts[i].p_miss >= pts[i - 1].p_miss);
    CHECK(pts[i].p_fa <= pts[i - 1].p_fa);
  }
}

TEST_CASE("per-class and pooled eer") {
  TrialSet perfect = MakeTrials(3, {{0, {5, 0, 0}}, {1, {0, 5, 0}}, {2, {0, 0, 5}}, {0, {4, 1, 1}}});
  EerSummary s = ComputeEer(perfect);
  CHECK(s.averaged == 0.0);
  CHECK(s.pooled == 0.0);
  CHECK(s.per_class.size() == 3);

  Rng rng(3);
  TrialSet noisy = NoisySystem(&rng, 300, 3, 1.0, RoundRobin(300, 3));
  EerSummary n = ComputeEer(noisy);
  double mean = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(n.per_class[k] == ClassEer(noisy, k));
    mean += n.per_class[k];
  }
  CHECK(n.averaged == doctest::Approx(mean / 3.0).epsilon(1e-15));
  CHECK(n.pooled > 0.0);
  CHECK(n.pooled < 0.5);

  TrialSet one = MakeTrials(1, {{0, {1.0}}, {0, {2.0}}});
  CHECK_THROWS_AS(ComputeEer(one), ArgumentError);
  TrialSet missing = MakeTrials(3, {{0, {1, 0, 0}}, {1, {0, 1, 0}}});
  CHECK_THROWS_AS(ComputeEer(missing), ArgumentError);
}

TEST_CASE("identically distributed scores give eer one half") {
  Vector same = {0.3, -1.0, 2.0, 2.0, 5.5};
  CHECK(Eer(same, same) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("cavg examples") {
  TrialSet oracle = MakeTrials(3, {{0, {50, 0, 0}}, {1, {0, 50, 0}}, {2, {0, 0, 50}}});
  CHECK(ComputeCavg(oracle).cavg == 0.0);

  TrialSet zeros = MakeTrials(3, {{0, {0, 0, 0}}, {1, {0, 0, 0}}, {2, {0, 0, 0}}, {2, {0, 0, 0}}});
  CavgResult z = ComputeCavg(zeros);
  for (double m : z.p_miss) CHECK(m == 1.0);
  for (double f : z.p_fa.Data()) CHECK(f == 0.0);
  CHECK(z.cavg == 0.5);

  // Hand-built: each class has one correct and one missed trial; the misses
  // of class 0 and class 2 are false alarms for class 1 and class 0.
  TrialSet hand = MakeTrials(3, {{0, {2, 1, 0}},
                                 {0, {0, 1, -1}},
                                 {1, {0, 3, 1}},
                                 {1, {1, 1, 0}},
                                 {2, {2, 0, 1}},
                                 {2, {-1, 0, 5}}});
  CavgResult h = ComputeCavg(hand);
  CHECK(h.p_miss == Vector{0.5, 0.5, 0.5});
  CHECK(h.p_fa(1, 0) == 0.5);
  CHECK(h.p_fa(0, 2) == 0.5);
  CHECK(h.p_fa(0, 1) == 0.0);  // a tie is not a false alarm
  CHECK(h.p_fa(2, 1) == 0.0);
  CHECK(h.p_fa(1, 2) == 0.0);
  CHECK(h.p_fa(2, 0) == 0.0);
  CHECK(h.pair_cost(1, 0) == 0.5);
  CHECK(h.pair_cost(0, 1) == 0.25);
  CHECK(h.cavg == 1.0 / 3.0);

  CHECK_THROWS_AS(ComputeCavg(MakeTrials(3, {{0, {1, 0, 0}}})), ArgumentError);
}

TEST_CASE("cavg matches the per-pair oracle and ignores class relabeling") {
  Rng rng(4);
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t K = 2 + rng.UniformInt(4);
    TrialSet ts = NoisySystem(&rng, 12 * K, K, 1.0, RoundRobin(12 * K, K));
    if (inst % 2 == 0)
      for (auto &t : ts.trials)
        for (double &s : t.scores) s = std::round(s);
    const double c = ComputeCavg(ts).cavg;
    CHECK(std::abs(c - testing::PairwiseCavg(ts)) <= 1e-12);

    std::vector<std::size_t> perm(K);
    for (std::size_t k = 0; k < K; ++k) perm[k] = k;
    Shuffle(&rng, std::span<std::size_t>(perm));
    TrialSet relabeled = ts;
    for (std::size_t i = 0; i < ts.trials.size(); ++i) {
      relabeled.trials[i].label = perm[ts.trials[i].label];
      for (std::size_t k = 0; k < K; ++k) relabeled.trials[i].scores[perm[k]] = ts.trials[i].scores[k];
    }
    CHECK(std::abs(ComputeCavg(relabeled).cavg - c) <= 1e-12);
  }
}

TEST_CASE("fusion identities") {
  Rng rng(5);
  TrialSet a = NoisySystem(&rng, 30, 3, 1.0, RoundRobin(30, 3));
  CHECK(Fuse({a}, {{1.0}, {0.0, 0.0, 0.0}}) == a);
  CHECK(Fuse({a, a}, {{0.5, 0.5}, {0.0, 0.0, 0.0}}) == a);
  CHECK_THROWS_AS(Fuse({a}, {{1.0, 1.0}, {0.0, 0.0, 0.0}}), ArgumentError);

  TrialSet b = a;
  std::swap(b.trials[0], b.trials[1]);
  CHECK_THROWS_AS(Fuse({a, b}, {{0.5, 0.5}, {0, 0, 0}}), AlignmentError);
  b = a;
  b.trials.pop_back();
  CHECK_THROWS_AS(Fuse({a, b}, {{0.5, 0.5}, {0, 0, 0}}), AlignmentError);
  b = a;
  b.trials[3].id = "other";
  CHECK_THROWS_AS(TrainFusion({a, b}), AlignmentError);
}

TEST_CASE("fusion training") {
  Rng rng(6);
  const auto labels = RoundRobin(3000, 3);
  TrialSet informative = NoisySystem(&rng, 3000, 3, 1.5, labels);
  TrialSet noise = NoisySystem(&rng, 3000, 3, 0.0, labels);
  FusionResult r = TrainFusion({informative, noise});
  CHECK(r.converged);
  CHECK(std::abs(r.weights.weights[1]) <= 0.05);
  CHECK(r.weights.weights[0] > 0.5);
  CHECK(r.loss <= FusionLoss({informative, noise}, {{0.5, 0.5}, {0, 0, 0}}));

  FusionResult dup = TrainFusion({informative, informative});
  CHECK(std::abs(dup.weights.weights[0] - dup.weights.weights[1]) <= 1e-6);

  FusionOptions none;
  none.max_iters = 0;
  FusionResult init = TrainFusion({informative, noise}, none);
  CHECK(init.weights.weights == Vector{0.5, 0.5});
  CHECK(init.weights.bias == Vector{0.0, 0.0, 0.0});
  CHECK(init.iterations == 0);

  // Two systems with independent errors: fusion helps on its own training data.
  TrialSet x = NoisySystem(&rng, 3000, 3, 1.0, labels);
  TrialSet y = NoisySystem(&rng, 3000, 3, 1.0, labels);
  FusionResult fy = TrainFusion({x, y});
  const double fused = ComputeEer(Fuse({x, y}, fy.weights)).averaged;
  const double best = std::min(ComputeEer(x).averaged, ComputeEer(y).averaged);
  MESSAGE("fused " << fused << " best single " << best);
  CHECK(fused <= best);

  // Trained fusion is deterministic.
  CHECK(TrainFusion({x, y}).weights == fy.weights);

  TrialSet tiny = MakeTrials(2, {{0, {1, 0}}, {1, {0, 1}}, {1, {0, 2}}});
  CHECK_THROWS_AS(TrainFusion({tiny}), ArgumentError);
}

TEST_CASE("scores file round trip") {
  Rng rng(7);
  TrialSet ts = NoisySystem(&rng, 20, 4, 1.0, RoundRobin(20, 4));
  ts.trials[0].scores[0] = 0.1;
  ts.trials[1].scores[2] = -1e-300;
  const std::string text = FormatScores(ts);
  CHECK(text.rfind("t0\tlang0\tlang0:0.10000000000000001,lang1:", 0) == 0);
  TrialSet back = ParseScores(text, "mem");
  CHECK(back == ts);
  CHECK(FormatScores(back) == text);

  CHECK_THROWS_AS(ParseScores("a\tlang0\n", "mem"), FormatError);
  CHECK_THROWS_AS(ParseScores("a\tlang9\tlang0:1,lang1:2\n", "mem"), FormatError);
  CHECK_THROWS_AS(ParseScores("a\tlang0\tlang0:x,lang1:2\n", "mem"), FormatError);
  CHECK_THROWS_AS(ParseScores("a\tlang0\tlang0:nan,lang1:2\n", "mem"), FormatError);
  CHECK_THROWS_AS(ParseScores("a\tlang0\tlang0:1,lang1:2\nb\tlang0\tlang1:1,lang0:2\n", "mem"),
                  FormatError);
  CHECK_THROWS_AS(ParseScores("a\tlang0\tlang0:1,lang1:2\na\tlang0\tlang0:1,lang1:2\n", "mem"),
                  FormatError);

  TrialSet some = SelectTrials(ts, {"t3", "t1", "missing"});
  REQUIRE(some.trials.size() == 2);
  CHECK(some.trials[0].id == "t1");
  CHECK(some.trials[1].id == "t3");
}

}  // namespace lde
