#pragma once

#include <json.hpp>

#include "sentinel/fusion.hpp"
#include "sentinel/plate.hpp"

namespace sentinel::codec {

using nlohmann::json;

json to_json(const PlateMatchDecision& decision);
json to_json(const PlateParse& parse);
json to_json(const Alert& alert);

/// Inverse of to_json(const Alert&). Throws Error(SchemaError).
Alert alert_from_json(const json& j);

}  // namespace sentinel::codec
