#pragma once

#include <json.hpp>
#include <string>

#include "polling/approximator.hpp"
#include "polling/core_model.hpp"
#include "polling/simulator.hpp"

namespace polling {

inline constexpr const char* kSpecSchemaVersion = "v1";

/// Parses a v1 spec document. Unknown keys, non-finite numbers and invalid
/// systems are rejected with ErrorCode::Schema or the model's own error code.
SystemSpec spec_from_json(const nlohmann::json& doc);
nlohmann::json spec_to_json(const SystemSpec& spec);

SystemSpec load_spec_file(const std::string& path);

nlohmann::json density_mode_to_json(const DensityMode& mode);
DensityMode density_mode_from_json(const nlohmann::json& value);

nlohmann::json estimate_to_json(const SimEstimate& est);

}  // namespace polling
