#pragma once

// JSON forms of the shared domain types. Field order is stable so that
// emitted documents diff cleanly.

#include <json.hpp>

#include "inkeval/core.hpp"

namespace inkeval {

using Json = nlohmann::ordered_json;

Json to_json(const BoundingBox& box);
Json to_json(const RoiRegion& roi);
Json to_json(const Theme& theme);
Json to_json(const ExpertResponse& response);

/// Throws Error(SchemaMismatch) for missing keys or wrong types and
/// Error(InvalidValue) for values that break a type invariant.
Theme theme_from_json(const Json& j);
RoiRegion roi_from_json(const Json& j);
ExpertResponse expert_response_from_json(const Json& j);

/// Serializes with a trailing newline, the form every tool writes.
std::string dump_line(const Json& j);

}  // namespace inkeval
