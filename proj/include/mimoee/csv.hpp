#pragma once

// Minimal CSV helpers for the flat numeric tables the tools write.

#include <iosfwd>
#include <string>
#include <vector>

namespace mimoee {

/// Shortest "%.17g" style text that reads back to the same double.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> comments;  ///< leading lines starting with '#', without the '#'
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws InvalidInput if absent.
  std::size_t column(const std::string& name) const;
};

/// Parses comma-separated text without quoting. Throws InvalidInput on rows
/// whose width differs from the header.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace mimoee
