#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace hed::jsonl {

// Calls fn(line_number, parsed) for every non-empty line. Line numbers are
// 1-based. Throws FileError when the file cannot be opened and SchemaError
// (with the line number) when a line is not valid JSON.
void for_each(const std::filesystem::path& path,
              const std::function<void(std::size_t, const nlohmann::json&)>& fn);

std::vector<nlohmann::json> read_all(const std::filesystem::path& path);

// Writes content atomically: temp file in the same directory, then rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// One dump()-ed object per line, atomic.
void write_lines_atomic(const std::filesystem::path& path,
                        const std::vector<nlohmann::ordered_json>& rows);

// Appends one line to an existing log (creates it if absent). Not atomic by
// design: this is the append-only run log.
void append_line(const std::filesystem::path& path, const nlohmann::ordered_json& row);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace hed::jsonl
