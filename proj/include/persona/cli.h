#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace persona {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

// Entry point of the persona command line; args exclude the program name.
// Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace persona
