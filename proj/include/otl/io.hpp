#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace otl {

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Opens a file for writing, creating parent directories; throws
/// ArtifactError on failure.
std::ofstream open_output(const std::filesystem::path& path);

/// Reads a CSV file into rows of fields. Lines starting with '#' are
/// returned through `comments` and skipped; the header row is the first
/// non-comment row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments;

  /// Column index by name; throws ArtifactError naming the column.
  std::size_t column(const std::string& name) const;
};
CsvTable read_csv(const std::filesystem::path& path);

/// Value of "key=value" in a "# key=value" comment line, or empty.
std::string comment_value(const CsvTable& table, const std::string& key);

} // namespace otl
