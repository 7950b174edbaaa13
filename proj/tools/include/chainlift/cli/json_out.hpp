#pragma once

#include <string>

#include <json.hpp>

#include "chainlift/geometry.hpp"

namespace chainlift::cli {

using Json = nlohmann::ordered_json;

/// Serialises with keys in insertion order and every double as %.17g, so equal
/// values always produce equal bytes.
std::string dump(const Json& j, int indent = 2);

Json to_json(const Vec& v);
Json to_json(const Mat& m);  // row-major list of rows
Json to_json(const Box& b);

void write_file(const std::string& path, const std::string& text);

}  // namespace chainlift::cli
