#pragma once

#include <iosfwd>
#include <string>

#include "fhm/grid.hpp"

namespace fhm {

enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitInput = 2,
    kExitNonConvergence = 3,
    kExitVerification = 4,
};

/// Runs one `fhm` command. Human-readable output goes to `out`, diagnostics to
/// `err`; every command also writes a JSON report.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

/// "annulus:R1:R2" or "disc:R".
DomainSpec parse_domain(const std::string& text);
/// "RxA" -> (n_rad, n_ang).
std::pair<int, int> parse_grid_size(const std::string& text);

}  // namespace fhm
