#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace owmm {

using json = nlohmann::json;

// Every artifact the kit writes (scene files, traces, QA records, reports,
// wire payloads) goes through this one serializer: UTF-8, object keys in
// lexicographic order, floating-point numbers at 9 significant digits.
// Golden files and cross-run determinism depend on it, so nlohmann's own
// dump() is never used for output.
std::string canonical_dump(const json& j);

/// canonical_dump terminated with a newline, the on-disk convention.
std::string canonical_line(const json& j);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

/// Parses a JSON file, throwing std::runtime_error with the path on failure.
json parse_json_file(const std::filesystem::path& path);

}  // namespace owmm
