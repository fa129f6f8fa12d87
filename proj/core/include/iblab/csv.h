#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace iblab {

/// Every CSV the library writes starts with a schema line
///   #schema=<name>/v<version>
/// followed by the column header row. Readers reject other schemas or
/// versions with an ErrorKind::kIo "migration" error.
struct CsvTable {
  std::string schema;
  int version = 1;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  std::string to_string() const;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path, const std::string& schema, int version);

// Shortest round-trip decimal representation.
std::string format_double(double value);
double parse_double(const std::string& text);

}  // namespace iblab
