#include "otl/io.hpp"

#include "otl/error.hpp"

#include <sstream>

namespace otl {

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ArtifactError("cannot open '" + path.string() + "' for writing");
  return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

} // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("missing artifact '" + path.string() + "'");
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      table.comments.push_back(line);
      continue;
    }
    if (!have_header) {
      table.header = split_fields(line);
      have_header = true;
    } else {
      table.rows.push_back(split_fields(line));
    }
  }
  if (!have_header) throw ArtifactError("'" + path.string() + "' has no header row");
  return table;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ArtifactError("missing column '" + name + "'");
}

std::string comment_value(const CsvTable& table, const std::string& key) {
  const std::string prefix = "# " + key + "=";
  for (const auto& c : table.comments) {
    if (c.rfind(prefix, 0) == 0) return c.substr(prefix.size());
  }
  return {};
}

} // namespace otl
