#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace zonekit::csv {

struct Row {
  std::size_t line;  // 1-based line number in the file
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Column position by case-insensitive name.
  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name, std::string_view file) const;
};

/// Reads a comma-separated file with a header row. Blank lines are skipped,
/// fields are trimmed and surrounding double quotes removed. Throws IoError
/// when the file cannot be opened or has no header.
Table read(const std::string& path);
Table parse(std::string_view text, const std::string& origin = "<memory>");

std::vector<std::string> split_line(std::string_view line);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);
std::optional<bool> parse_flag(std::string_view s);

/// Shortest round-trip decimal representation ("nan" never emitted by writers).
std::string format_double(double v);

std::string lower(std::string_view s);

}  // namespace zonekit::csv
