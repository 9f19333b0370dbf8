// lde/error.h

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

#ifndef LDE_ERROR_H_
#define LDE_ERROR_H_

#include <stdexcept>
#include <string>

namespace lde {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument is outside its documented domain (negative std, K = 0, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A sequence operation received zero frames.
class EmptySequenceError : public Error {
 public:
  using Error::Error;
};

/// A sequence is too short for the requested operation.
class LengthError : public Error {
 public:
  using Error::Error;
};

/// A backward call does not match the forward that produced its cache.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Malformed file: bad magic, truncated record, unparsable line.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Trial sets that should describe the same utterances do not.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Bad run configuration (unknown key, unparsable value, missing path).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace lde

#endif  // LDE_ERROR_H_
