#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pglab/errors.hpp"

namespace pglab {

// Trace table as written to disk: ordered '#'-prefixed metadata lines, a
// header row, then numeric rows. All formatting is locale-independent and
// bit-faithful ("%.17g"), so identical runs produce identical bytes.
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string csv_to_string(const CsvTable& table) {
  std::string out;
  for (const auto& [key, value] : table.metadata) {
    out += "# ";
    out += key;
    out += ": ";
    out += value;
    out += '\n';
  }
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c > 0) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw DimensionError("csv_to_string: row width differs from the header");
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += ',';
      out += format_number(row[c]);
    }
    out += '\n';
  }
  return out;
}

inline void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("write_csv: cannot open " + path);
  out << csv_to_string(table);
  if (!out) throw ConfigError("write_csv: write failed for " + path);
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("read_csv: cannot open " + path);
  CsvTable table;
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::size_t start = 1;
      while (start < line.size() && line[start] == ' ') ++start;
      const std::size_t sep = line.find(": ", start);
      if (sep == std::string::npos)
        table.metadata.emplace_back(line.substr(start), "");
      else
        table.metadata.emplace_back(line.substr(start, sep - start), line.substr(sep + 2));
      continue;
    }
    std::stringstream cells(line);
    std::string cell;
    if (!saw_header) {
      while (std::getline(cells, cell, ',')) table.columns.push_back(cell);
      if (table.columns.empty()) throw ConfigError("read_csv: empty header in " + path);
      saw_header = true;
      continue;
    }
    std::vector<double> row;
    row.reserve(table.columns.size());
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError("read_csv: bad numeric cell '" + cell + "' in " + path);
      }
    }
    if (row.size() != table.columns.size())
      throw ConfigError("read_csv: ragged row in " + path);
    table.rows.push_back(std::move(row));
  }
  if (!saw_header) throw ConfigError("read_csv: no header row in " + path);
  return table;
}

inline std::size_t column_index(const CsvTable& table, const std::string& name) {
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    if (table.columns[c] == name) return c;
  throw ConfigError("column_index: no column named '" + name + "'");
}

inline std::vector<double> column_values(const CsvTable& table, const std::string& name) {
  const std::size_t c = column_index(table, name);
  std::vector<double> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) out.push_back(row[c]);
  return out;
}

// FNV-1a, used to stamp traces with a digest of the generating config.
inline std::uint64_t fnv1a_hash(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const char ch : s) {
    h ^= static_cast<std::uint8_t>(ch);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace pglab
