#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace natfact::cli {

/// Entry point of the `natfact` tool; `args` excludes the program name.
/// Returns the process exit status.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

/// Splices `key=value` lines of the file named by `--config` into `args` as
/// `--key value`, skipping keys already given on the command line.
std::vector<std::string> expand_config(std::vector<std::string> args);

}  // namespace natfact::cli
