#pragma once

#include <string>

#include <json.hpp>

#include "mfga/types.hpp"

namespace mfga::io {

using nlohmann::json;

/// Reals are written as shortest round-trip decimal strings so that a
/// reload reproduces the exact binary value. Plain JSON numbers are also
/// accepted on input.
std::string format_real(double value);
json real_to_json(double value);
double real_from_json(const json& j);

json vec_to_json(const Vec& v);
Vec vec_from_json(const json& j);
json mat_to_json(const Mat& m);
Mat mat_from_json(const json& j);

/// Returns j[key] or throws a configuration error naming the missing key.
const json& at(const json& j, const std::string& key, const std::string& context);

}  // namespace mfga::io
