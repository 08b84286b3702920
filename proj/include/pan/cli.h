#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pan {

enum ExitStatus : int { kExitOk = 0, kExitUserError = 1, kExitInternalError = 2 };

/// Entry point for the `pan` command. args excludes the program name.
///
///   train     --config FILE
///   evaluate  --checkpoint FILE --data TSV
///   predict   --checkpoint FILE [--input FILE]   (one tweet per line; stdin by default)
///   gradcheck [--seed N]
///   selftest  [--seed N]
///
/// Failures print a single diagnostic line to `err`.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace pan
