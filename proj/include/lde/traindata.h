// lde/traindata.h

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

#ifndef LDE_TRAINDATA_H_
#define LDE_TRAINDATA_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lde/encoding.h"
#include "lde/rng.h"

namespace lde {

// Nominal duration classes of evaluation utterances (short/medium/long
// stand in for 3 s / 10 s / 30 s test segments).
enum class Bucket : std::uint8_t { kNone = 0, kShort = 1, kMedium = 2, kLong = 3 };

std::string BucketName(Bucket b);
std::size_t BucketFrames(Bucket b);  // 100, 400, 1500; 0 for kNone

/**
   Generator of a synthetic language-ID corpus. Every class owns G "phones":
   Gaussian centers built from a phone inventory shared by all classes plus a
   class-specific shift, visited by a class-specific first-order Markov
   chain. Frames are the current phone's center plus isotropic noise.
*/
struct SyntheticSpec {
  std::size_t num_classes = 4;
  std::size_t feature_dim = 20;
  std::size_t num_phones = 5;
  std::size_t num_train = 800;
  std::size_t num_test = 400;
  std::size_t num_dev = 200;
  std::size_t min_length = 100;
  std::size_t max_length = 1500;
  double center_spread = 1.0;  // std of the shared phone inventory
  double class_shift = 0.3;    // std of the per-class perturbation of each phone
  double self_loop = 0.8;      // probability of staying on the current phone
  double noise_std = 1.5;
  std::uint64_t seed = 1;

  /// Throws ArgumentError on an infeasible spec.
  void Validate() const;

  bool operator==(const SyntheticSpec &) const = default;
};

struct Utterance {
  std::string id;
  std::size_t label = 0;
  Bucket bucket = Bucket::kNone;
  FeatureSequence features;  // D x L

  std::size_t Length() const { return features.NumCols(); }
  bool operator==(const Utterance &) const = default;
};

struct Corpus {
  std::size_t num_classes = 0;
  std::size_t feature_dim = 0;
  std::vector<Utterance> utterances;

  bool operator==(const Corpus &) const = default;
};

// Per-class generative model, exposed for tests and diagnostics.
struct ClassGenerator {
  Matrix centers;      // G x D
  Matrix transitions;  // G x G, rows sum to 1
};

struct SyntheticCorpus {
  std::vector<ClassGenerator> classes;
  Corpus train;
  Corpus test;  // bucketed durations
  Corpus dev;   // crops of training utterances at bucket durations
};

SyntheticCorpus GenerateCorpus(const SyntheticSpec &spec);

/// Exactly `length` frames: a uniformly placed contiguous crop when the input
/// is longer, wrap-around tiling when shorter, identity when equal (no draw).
FeatureSequence CropOrExtend(const FeatureSequence &x, std::size_t length, Rng *rng);

/**
   Shifted delta coefficients with parameters N-d-P-k over the first N
   dimensions. Output frame t (for every t with all taps in range) stacks
   x[t + i P + d] - x[t + i P - d] for i = 0..k-1; with append_static the
   N static coefficients of frame t come first. Throws LengthError unless
   L > 2d + (k-1)P.
*/
FeatureSequence Sdc(const FeatureSequence &x, std::size_t n, std::size_t d, std::size_t p,
                    std::size_t k, bool append_static = true);

struct CropPolicy {
  std::size_t crop_min = 200;
  std::size_t crop_max = 1000;

  std::size_t DrawLength(Rng *rng) const;

  bool operator==(const CropPolicy &) const = default;
};

struct Batch {
  std::size_t length = 0;
  std::vector<FeatureSequence> features;  // B sequences of D x length
  std::vector<std::size_t> labels;
  std::vector<std::size_t> indices;  // positions in the source utterance list
};

/**
   Mini-batch stream over a fixed utterance list. Each epoch visits every
   utterance once in a seeded random order; every step draws one length
   from the crop policy and crops or extends all members to it.
*/
class BatchIterator {
 public:
  BatchIterator(std::span<const Utterance> utts, std::size_t batch_size, CropPolicy policy,
                Rng rng);

  void StartEpoch();
  /// Fills *batch; false once the current epoch is exhausted.
  bool Next(Batch *batch);
  std::size_t StepsPerEpoch() const;
  const Rng &rng() const { return rng_; }

 private:
  std::span<const Utterance> utts_;
  std::size_t batch_size_;
  CropPolicy policy_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

/**
   Corpus file, version 1, all integers little-endian:
     header:  "LDEC" | u32 version | u32 K | u32 D
     record:  u32 id_len | id bytes | u32 label | u8 bucket | u32 L | u32 D |
              L*D f64 of the D x L matrix in row-major order
   Records run to end of file.
*/
void WriteCorpus(const std::string &path, const Corpus &corpus);
Corpus ReadCorpus(const std::string &path);
std::vector<char> SerializeCorpus(const Corpus &corpus);
Corpus ParseCorpus(std::span<const char> data, const std::string &context);

/// FNV-1a digest of the parsed content; equal for equal corpora.
std::uint64_t CorpusChecksum(const Corpus &corpus);

}  // namespace lde

#endif  // LDE_TRAINDATA_H_
