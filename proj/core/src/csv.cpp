#include "semann/csv.hpp"

#include <fstream>
#include <sstream>

#include "semann/errors.hpp"

namespace semann::csv {

Table parse(const std::string& text) {
  Table out;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool record_started = false;

  auto end_field = [&] {
    record.push_back(field);
    field.clear();
    record_started = true;
  };
  auto end_record = [&] {
    end_field();
    if (out.header.empty())
      out.header = record;
    else
      out.rows.push_back(record);
    record.clear();
    record_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      end_record();
    } else {
      field += c;
    }
  }
  if (in_quotes) throw SchemaError("csv: unterminated quoted field");
  if (!field.empty() || record_started) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    end_record();
  }
  return out;
}

Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("csv: cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

namespace {

void write_field(std::string& out, const std::string& f) {
  if (f.find_first_of(",\"\n\r") == std::string::npos) {
    out += f;
    return;
  }
  out += '"';
  for (char c : f) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

void write_record(std::string& out, const std::vector<std::string>& rec) {
  for (std::size_t i = 0; i < rec.size(); ++i) {
    if (i) out += ',';
    write_field(out, rec[i]);
  }
  out += '\n';
}

}  // namespace

std::string serialize(const Table& table) {
  std::string out;
  write_record(out, table.header);
  for (const auto& r : table.rows) write_record(out, r);
  return out;
}

void write_file(const std::string& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("csv: cannot write file: " + path);
  out << serialize(table);
}

}  // namespace semann::csv
