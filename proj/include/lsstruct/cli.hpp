#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lsstruct {

// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDegenerate = 2;

// Subcommands: simulate, classify, evaluate, loglik.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);
// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace lsstruct
