#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace soligas::cli {

// Exit codes
inline constexpr int kOk = 0;
inline constexpr int kFailedVerification = 1;
inline constexpr int kArgumentError = 2;
inline constexpr int kSolverFailure = 3;

// Runs the soligas command line. argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Same, without the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace soligas::cli
