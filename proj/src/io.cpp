#include "causalkit/io.hpp"

#include <fstream>
#include <sstream>

#include "causalkit/errors.hpp"

namespace causalkit {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open file for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorKind::Io, "read failed: " + path.string());
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open file for writing: " + path.string());
  out << content;
  out.flush();
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

Json read_json_file(const std::filesystem::path& path) {
  const std::string raw = read_text_file(path);
  try {
    return Json::parse(raw);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Parse, "invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace causalkit
