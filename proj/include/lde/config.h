// lde/config.h

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


#ifndef LDE_CONFIG_H_
#define LDE_CONFIG_H_

#include <string>

#include "lde/baseline.h"
#include "lde/train.h"
#include "lde/traindata.h"

namespace lde {

/**
   Everything one experiment needs, read from a plain-text file:

     ; comment
     [section]
     key = value

   Sections are paths, data, frontend, model, train and gmm. Missing keys
   keep their defaults, which form the desk recipe; unknown sections or keys
   and malformed values raise ConfigError. Lists are comma-separated.
   The model's input dimension and class count follow the data section.
*/
struct RunConfig {
  RunConfig();

  std::string data_dir = "data";  // corpus files of gen-data
  std::string work_dir = "exp";   // checkpoints, logs and scores
  SyntheticSpec data;
  ModelSpec model;
  TrainConfig train;
  GmmBaselineConfig gmm;

  /// Validates every part; throws ConfigError.
  void Validate() const;

  std::string TrainCorpusPath() const;
  std::string TestCorpusPath() const;
  std::string DevCorpusPath() const;

  bool operator==(const RunConfig &) const = default;
};

RunConfig ParseRunConfig(const std::string &text, const std::string &context);
RunConfig ReadRunConfig(const std::string &path);

/// Complete canonical text of `cfg`; parsing it gives `cfg` back.
std::string FormatRunConfig(const RunConfig &cfg);

}  // namespace lde

#endif  // LDE_CONFIG_H_
