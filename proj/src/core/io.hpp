#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

namespace scaa::io {

using Json = nlohmann::json;

std::string read_text(const std::filesystem::path& path);

// Writes through a sibling temporary file and renames it into place, so readers
// never observe a partially written artifact.
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

// Parses UTF-8 JSON; ParseError names the file on failure.
Json read_json(const std::filesystem::path& path);
Json parse_json(std::string_view text, std::string_view origin);

// Canonical, stable dump (2-space indent, trailing newline).
std::string dump(const Json& j);

}  // namespace scaa::io
