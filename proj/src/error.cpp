#include "polling/error.hpp"

namespace polling {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidMoment: return "InvalidMoment";
        case ErrorCode::ZeroTotalSwitchover: return "ZeroTotalSwitchover";
        case ErrorCode::LoadOutOfRange: return "LoadOutOfRange";
        case ErrorCode::UnnormalizedLoads: return "UnnormalizedLoads";
        case ErrorCode::ZeroArrivalRate: return "ZeroArrivalRate";
        case ErrorCode::InconsistentDensityMode: return "InconsistentDensityMode";
        case ErrorCode::EmptySystem: return "EmptySystem";
        case ErrorCode::DegenerateLoad: return "DegenerateLoad";
        case ErrorCode::ZeroLoad: return "ZeroLoad";
        case ErrorCode::NumericalBudget: return "NumericalBudget";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::Schema: return "Schema";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace polling
