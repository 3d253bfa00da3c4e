#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crl::cli {

enum ExitCode : int { Success = 0, RuntimeFailure = 1, ConfigFailure = 2 };

/// Entry point behind the crl_lab binary: `run`, `sweep` and `plot`.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload for tests.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crl::cli
