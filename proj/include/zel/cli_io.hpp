#pragma once

// Command-line front end: argument parsing, validation and CSV/JSON emission.

#include <iosfwd>
#include <string>
#include <vector>

namespace zel {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitNonFinite = 3;

/// Runs the `zel` command line; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// "start:stop:step" (inclusive, step > 0), a comma list, or one number.
std::vector<double> parse_v_grid(const std::string& text);

/// Comma-separated positive integers.
std::vector<int> parse_int_list(const std::string& text);

/// Shortest-stable decimal form with 17 significant digits.
std::string format_double(double v);

/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(const std::string& s);

}  // namespace zel
