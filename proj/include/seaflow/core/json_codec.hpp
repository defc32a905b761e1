#pragma once

#include <string>

#include <json.hpp>

#include "seaflow/core/error.hpp"
#include "seaflow/core/observation.hpp"

namespace seaflow {

/// Canonical interchange schema version carried by every encoded observation.
inline constexpr const char* kObservationSchemaVersion = "1";

/// Canonical JSON object, fixed key order. Absent value omits the "value" key.
nlohmann::ordered_json observation_to_json(const Observation& obs);

Expected<Observation> observation_from_json(const nlohmann::json& j);

/// One-line serialization used on broker payloads and in the journal.
std::string observation_to_line(const Observation& obs);

Expected<Observation> observation_from_line(const std::string& line);

}  // namespace seaflow
