#include "iblab/csv.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "iblab/checkpoint.h"
#include "iblab/error.h"

namespace iblab {

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  fail(ErrorKind::kIo, "CSV schema " + schema + " has no column '" + name + "'");
}

std::string CsvTable::to_string() const {
  std::ostringstream out;
  out << "#schema=" << schema << "/v" << version << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != columns.size()) fail(ErrorKind::kUsage, "CSV row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  return out.str();
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  write_text_atomic(path, table.to_string());
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path, const std::string& schema, int version) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("#schema=", 0) != 0) {
    fail(ErrorKind::kIo, path.string() + ": missing schema line");
  }
  const std::string tag = line.substr(8);
  const std::string expected = schema + "/v" + std::to_string(version);
  if (tag != expected) {
    fail(ErrorKind::kIo, path.string() + ": schema " + tag + " cannot be read as " + expected +
                             " (no migration registered)");
  }
  CsvTable table;
  table.schema = schema;
  table.version = version;
  if (!std::getline(in, line)) fail(ErrorKind::kIo, path.string() + ": missing header row");
  table.columns = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split_line(line);
    if (row.size() != table.columns.size()) {
      fail(ErrorKind::kIo, path.string() + ": row width does not match header");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) fail(ErrorKind::kUsage, "format_double failed");
  return std::string(buf, end);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    fail(ErrorKind::kIo, "not a number: '" + text + "'");
  }
  return value;
}

}  // namespace iblab
