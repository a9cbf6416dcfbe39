#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace berryline::cli {

// Exit codes: 0 ok, 1 malformed flags or invalid input, 2 singular
// parameters, 3 nonconvergence.
enum ExitCode : int { ok = 0, malformed = 1, singular = 2, not_converged = 3 };

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace berryline::cli
