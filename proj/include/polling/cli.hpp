#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "polling/error.hpp"

namespace polling::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitBudget = 3;
inline constexpr int kExitIo = 4;

int exit_code_for(ErrorCode code) noexcept;

/// Entry point shared by the `polling` binary and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct RhoGrid {
    double start = 0.0;
    double stop = 0.0;
    double step = 0.0;
};

/// Parses "start:stop:step"; throws Error(InvalidConfig) on malformed or out-of-range grids.
RhoGrid parse_rho_grid(const std::string& text);
std::vector<double> expand(const RhoGrid& grid);

}  // namespace polling::cli
