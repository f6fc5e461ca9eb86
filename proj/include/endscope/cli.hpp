#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace endscope {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfigError = 1,   // bad config, bad arguments, IO failure
    kExitViolation = 2,     // theorem flag violated, sweep disagreement, failed example
    kExitInconclusive = 3,  // Inconclusive verdicts present
};

/// Entry point of the endscope command line; `args` excludes the program
/// name.  Subcommands: analyze, sweep, verify-examples, plotdata.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace endscope
