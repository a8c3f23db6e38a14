#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace spe {

/// Exit codes shared by every command.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,     // file, parse, model, solver or refactoring error
  kExitViolations = 2,  // analyze: at least one requirement violated
  kExitUsage = 64,      // bad command line
};

/// Runs the `spe` command line; `args` excludes the program name.
///
///   analyze      solve a model and check its requirements
///   detect       list BLOB and EST occurrences
///   refactor     apply an action and write the new model
///   session      new | show | expand | backtrack | export | ledger
///   walkthrough  replay the two-branch case study
///   serve        start the HTTP service
///
/// Global flags: --model, --out, --solver, --seed, --format text|structured.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spe
