#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace polling {

enum class ErrorCode {
    InvalidMoment,
    ZeroTotalSwitchover,
    LoadOutOfRange,
    UnnormalizedLoads,
    ZeroArrivalRate,
    InconsistentDensityMode,
    EmptySystem,
    DegenerateLoad,
    ZeroLoad,
    NumericalBudget,
    InvalidConfig,
    Schema,
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace polling
