#include "bmrmm/table_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "bmrmm/errors.hpp"

namespace bmrmm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

double parse_double_cell(const std::string& cell, const std::filesystem::path& path) {
  double value = 0.0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw DataError(path.string() + ": not a number: '" + cell + "'");
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::string_view field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    out.emplace_back(trim(field));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

TextTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  TextTable table;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (!header_seen) {
      table.header = std::move(cells);
      header_seen = true;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  if (!header_seen) throw DataError(path.string() + ": empty file");
  return table;
}

void write_csv(const std::filesystem::path& path, const TextTable& table) {
  std::ostringstream out;
  auto write_row = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
  write_text_file(path, out.str());
}

void write_numeric_csv(const std::filesystem::path& path, const NumericTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  write_text_file(path, out);
}

NumericTable read_numeric_csv(const std::filesystem::path& path) {
  const TextTable text = read_csv(path);
  NumericTable table;
  table.header = text.header;
  table.rows.reserve(text.rows.size());
  for (const auto& row : text.rows) {
    if (row.size() != text.header.size()) {
      throw DataError(path.string() + ": ragged row");
    }
    std::vector<double> values;
    values.reserve(row.size());
    for (const auto& cell : row) values.push_back(parse_double_cell(cell, path));
    table.rows.push_back(std::move(values));
  }
  return table;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace bmrmm
