#pragma once

// Batch front end: subcommands, JSON configuration and reports.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace fhj::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInvalidConfig = 2;

/// Raised for anything wrong with the configuration; maps to exit status 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses `argv`, runs one subcommand and writes the report. The report goes
/// to `<out>/<subcommand>.json` (plus CSV side files) when --out is given and
/// to `out` otherwise. Nothing is written when the configuration is invalid.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::vector<std::string> subcommands();

} // namespace fhj::cli
