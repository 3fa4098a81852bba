#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace negbias::jsonl {

using Json = nlohmann::ordered_json;

/// Calls `on_record(json, line_no)` for every non-blank line (1-based line
/// numbers). Throws InputError if the file cannot be opened and
/// MalformedLine if a line is not a JSON object.
void for_each(const std::filesystem::path& path,
              const std::function<void(const Json&, std::size_t)>& on_record);

/// Writes one compact JSON object per line, creating parent directories.
/// Writes to a sibling temp file and renames it into place.
void write(const std::filesystem::path& path, const std::vector<Json>& records);

/// Writes text atomically (temp file + rename), creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& contents);

std::string read_text(const std::filesystem::path& path);

/// Field accessors that raise MalformedLine with the offending key.
std::string get_string(const Json& j, const char* key, std::size_t line_no);
int get_int(const Json& j, const char* key, std::size_t line_no);
bool get_bool(const Json& j, const char* key, std::size_t line_no);

}  // namespace negbias::jsonl
