#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace softad {

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

/// Minimal CSV: comma separated, no quoting. Fields produced by this project
/// are numbers and identifiers only.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
};

void write_csv(std::ostream& out, const CsvTable& table);
CsvTable read_csv(std::istream& in);

}  // namespace softad
