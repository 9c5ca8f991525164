#pragma once

#include <string>

#include "json.hpp"

namespace carleson::dsl {

using Json = nlohmann::ordered_json;

/// Serializes with fixed field order and 17 significant digits. Infinite
/// values are written as the strings "inf" / "-inf", NaN as null.
std::string write_json(const Json& value, int indent = 2);

}  // namespace carleson::dsl
