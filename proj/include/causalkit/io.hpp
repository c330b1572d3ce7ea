#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace causalkit {

// Small file helpers; all failures raise ErrorKind::Io. JSON documents are
// written with nlohmann::ordered_json so field order is stable and outputs
// diff cleanly.
using Json = nlohmann::ordered_json;

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& doc);
void ensure_dir(const std::filesystem::path& dir);

}  // namespace causalkit
