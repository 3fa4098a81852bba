#include "negbias/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "negbias/errors.hpp"
#include "negbias/text.hpp"

namespace negbias::jsonl {

void for_each(const std::filesystem::path& path,
              const std::function<void(const Json&, std::size_t)>& on_record) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw MalformedLine(line_no, e.what());
    }
    if (!j.is_object()) throw MalformedLine(line_no, "not a JSON object");
    on_record(j, line_no);
  }
}

void write_text(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << contents;
    if (!out) throw InputError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write(const std::filesystem::path& path, const std::vector<Json>& records) {
  std::string buf;
  for (const auto& r : records) {
    buf += r.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    buf += '\n';
  }
  write_text(path, buf);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string get_string(const Json& j, const char* key, std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw MalformedLine(line_no, std::string("missing or non-string field '") + key + "'");
  }
  return it->get<std::string>();
}

int get_int(const Json& j, const char* key, std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer()) {
    throw MalformedLine(line_no, std::string("missing or non-integer field '") + key + "'");
  }
  return it->get<int>();
}

bool get_bool(const Json& j, const char* key, std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_boolean()) {
    throw MalformedLine(line_no, std::string("missing or non-boolean field '") + key + "'");
  }
  return it->get<bool>();
}

}  // namespace negbias::jsonl
