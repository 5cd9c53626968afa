#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qgf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point behind the `qgf` executable. `args` excludes the program
/// name. Settings resolve as flag > environment > --config file > default.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qgf::cli
