#include "core/io.hpp"

#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "core/errors.hpp"

namespace scaa::io {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) raise(Errc::kIo, "read failed for " + path.string());
  return ss.str();
}

void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
  const auto parent = path.parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
    if (ec) raise(Errc::kIo, "cannot create directory " + parent.string() + ": " + ec.message());
  }
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(Errc::kIo, "cannot open " + tmp.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) raise(Errc::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    raise(Errc::kIo, "cannot move output into place at " + path.string());
  }
}

Json parse_json(std::string_view text, std::string_view origin) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    raise(Errc::kParse, std::string(origin) + ": " + e.what());
  }
}

Json read_json(const std::filesystem::path& path) {
  return parse_json(read_text(path), path.string());
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace scaa::io
