#pragma once

// Command-line front end. run() is the whole program minus process plumbing so
// tests can drive it with string streams.

#include <iosfwd>
#include <string>
#include <vector>

namespace chenhopf::cli {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kHypothesis = 1, kNumerical = 2, kInput = 3 };

/// Shortest decimal string that reads back to the same double.
[[nodiscard]] std::string format_double(double v);

/// argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace chenhopf::cli
