#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace bmrmm {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

/// Splits one comma-separated line. Surrounding whitespace and quotes around
/// a field are removed; no escaped quotes inside fields.
std::vector<std::string> split_csv_line(std::string_view line);

/// A header plus rows of text cells.
struct TextTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

TextTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const TextTable& table);

/// Column-major numeric table: one row per kept iteration.
struct NumericTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write_numeric_csv(const std::filesystem::path& path, const NumericTable& table);
NumericTable read_numeric_csv(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace bmrmm
