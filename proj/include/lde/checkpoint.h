// lde/checkpoint.h

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

#ifndef LDE_CHECKPOINT_H_
#define LDE_CHECKPOINT_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lde/baseline.h"
#include "lde/train.h"

namespace lde {

/**
   Trained system plus everything needed to reproduce it.

   File layout, little-endian throughout:
     "LDECKPT\0" | u32 version (1)
     then sections, each 4-byte tag | u64 payload length | payload:
       CONF  u32 length + text of the run configuration
       ARCH  u8 kind (0 neural, 1 gmm) followed by the architecture fields
       PARM  u32 count, then per parameter: name string | u32 rows | u32 cols |
             rows*cols f64 in row-major order
       GMMS  (gmm kind only) UBM or per-class models, each u32 C | u32 D |
             C weights | C*D means | C*D variances
       RNG_  u64 key | u64 counter of the batching stream
       EPCH  u64 completed epochs
   Every section is required once for its kind; unknown tags are rejected.
*/
struct Checkpoint {
  enum class Kind : std::uint8_t { kNeural = 0, kGmm = 1 };

  Kind kind = Kind::kNeural;
  std::string config_text;
  Model model;        // kNeural
  GmmBaseline gmm;    // kGmm
  std::uint64_t rng_key = 0;
  std::uint64_t rng_counter = 0;
  std::uint64_t epoch = 0;

  std::size_t NumClasses() const;
  Vector Scores(const FeatureSequence &x) const;
};

std::vector<char> SerializeCheckpoint(const Checkpoint &ckpt);
Checkpoint ParseCheckpoint(std::span<const char> data, const std::string &context);
void SaveCheckpoint(const std::string &path, const Checkpoint &ckpt);
Checkpoint LoadCheckpoint(const std::string &path);

}  // namespace lde

#endif  // LDE_CHECKPOINT_H_
