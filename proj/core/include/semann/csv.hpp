#pragma once

#include <string>
#include <vector>

namespace semann::csv {

/// A parsed delimited table: header row plus string cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Parse comma-separated UTF-8 text. Quoted fields may contain commas,
/// doubled quotes, and newlines; CRLF and LF line endings both accepted.
Table parse(const std::string& text);

Table read_file(const std::string& path);

/// Serialize; fields containing commas, quotes, or newlines are quoted.
std::string serialize(const Table& table);

void write_file(const std::string& path, const Table& table);

}  // namespace semann::csv
