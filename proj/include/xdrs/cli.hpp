#pragma once

#include <iosfwd>

namespace xdrs {

inline constexpr const char* kToolVersion = "xdrs 0.1.0";

// Subcommands: ingest, train, parse, evaluate, analyze, gradcheck.
// Returns the process exit code: 0 ok, 2 config, 3 data, 4 numeric.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace xdrs
