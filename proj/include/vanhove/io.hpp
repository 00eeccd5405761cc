#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace vanhove::io {

// Shortest form that still round-trips: printf %.17g.
std::string format_double(double x);

// Writes one comma-separated row terminated by '\n' (LF only).
void write_row(std::ostream& out, const std::vector<std::string>& cells);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Minimal CSV reader: header row plus numeric rows. Blank lines are skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvTable read_numeric_csv(const std::filesystem::path& path);

}  // namespace vanhove::io
