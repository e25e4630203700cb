#pragma once

#include <string>

#include <json.hpp>

namespace dtrans::cli {

/// Serializes with sorted keys, two-space indent and every floating-point
/// number printed as %.17g; non-finite numbers become null.
std::string write_json(const nlohmann::json& value);

/// %.17g
std::string format_double(double x);

}  // namespace dtrans::cli
