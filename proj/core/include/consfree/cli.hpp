#pragma once

// Command-line front end: check / analyze / run / tabulate / transform /
// compile-tm / gen-counter subcommands over .cf program files and .tm
// machine files.  All output is deterministic for a given command line and
// file contents.

#include <ostream>
#include <string>
#include <vector>

namespace consfree {

// Parses and dispatches a command line (without the program name).  Returns
// the process exit code: 0 on success, 1 when an analysis rejects the
// program (type errors, data-building programs, metric violations), 2 on
// usage errors and unparsable files.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace consfree
