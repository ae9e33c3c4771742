#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace buyflow::csv {

// A header-keyed CSV table. Fields may be double-quoted with "" escapes;
// quoted fields may not span lines.
struct Table {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // source line of each row

  // Index of a required column; throws InputError if absent.
  std::size_t column(std::string_view name) const;
};

Table read(const std::string& path);
Table parse(std::istream& in, const std::string& path);

std::vector<std::string> split_line(std::string_view line);

std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace buyflow::csv

namespace buyflow::csv {

// Shortest round-trip decimal rendering of a double.
std::string num(double value);

}  // namespace buyflow::csv
