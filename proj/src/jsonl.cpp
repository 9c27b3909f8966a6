#include "hed/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "hed/errors.hpp"

namespace hed::jsonl {

void for_each(const std::filesystem::path& path,
              const std::function<void(std::size_t, const nlohmann::json&)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) +
                        ": malformed JSON line");
    }
    fn(line_no, j);
  }
}

std::vector<nlohmann::json> read_all(const std::filesystem::path& path) {
  std::vector<nlohmann::json> rows;
  for_each(path, [&](std::size_t, const nlohmann::json& j) { rows.push_back(j); });
  return rows;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto dir = path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot write " + tmp.string());
    out << content;
    if (!out.good()) throw FileError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw FileError("rename " + tmp.string() + " -> " + path.string() +
                          " failed: " + ec.message());
}

void write_lines_atomic(const std::filesystem::path& path,
                        const std::vector<nlohmann::ordered_json>& rows) {
  std::ostringstream out;
  for (const auto& row : rows) out << row.dump() << '\n';
  write_file_atomic(path, out.str());
}

void append_line(const std::filesystem::path& path, const nlohmann::ordered_json& row) {
  const auto dir = path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw FileError("cannot append to " + path.string());
  out << row.dump() << '\n';
  if (!out.good()) throw FileError("append failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace hed::jsonl
