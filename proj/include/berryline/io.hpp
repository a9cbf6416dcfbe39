#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace berryline {

// Shortest-safe round trip: 17 significant digits, "nan"/"inf" spelled out.
std::string format_double(double x);

// JSON text with every floating value printed at 17 significant digits.
// Non-finite numbers become null.
std::string dump_json(const nlohmann::ordered_json& j, int indent = 2);

// Writes to a sibling temporary and renames over the target.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace berryline
