#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace mobiscope {

/// Sorted keys, no insignificant whitespace, shortest round-trip numbers,
/// trailing newline. Non-finite numbers are rejected (IoError) because JSON
/// cannot carry them.
std::string canonical_dump(const nlohmann::json& doc);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);
/// IoError when unreadable, ParseError when malformed.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace mobiscope
