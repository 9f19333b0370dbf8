// lde/cli.h

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


#ifndef LDE_CLI_H_
#define LDE_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace lde {

/// Process exit codes of the ldelid tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,      // bad flags, bad config, refused overwrite
  kExitData = 2,       // missing or malformed input, shape mismatch
  kExitNumerical = 3,  // divergence
};

/**
   Runs one ldelid command line. `args` starts with the program name, as in
   argv. Reports go to `out`, errors to `err`; the return value is the exit
   code. Subcommands: gen-data, train, eval, fuse, gmm.
*/
int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace lde

#endif  // LDE_CLI_H_
