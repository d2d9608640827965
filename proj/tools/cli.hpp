#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace relmarl::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kRuntime = 2, kVerification = 3 };

/// Entry point of the `relmarl` driver; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace relmarl::cli
