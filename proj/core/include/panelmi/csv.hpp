#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

/// Minimal RFC 4180 reader/writer: comma separator, double-quote quoting, UTF-8.
namespace panelmi::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
};

/// Parses `text`; blank lines are skipped and a leading BOM is ignored.
/// Throws ParseError on an unterminated quoted field.
Table parse(std::string_view text);
Table read_file(const std::filesystem::path& path);

std::string quote(std::string_view field);
void write_row(std::ostream& out, std::span<const std::string> fields);

/// Shortest representation that reads back to the identical double.
std::string format_real(double value);
/// Fixed-point with `decimals` digits after the point.
std::string format_real(double value, int decimals);

/// Strict real parse: optional sign, decimal or exponent form; rejects inf/nan and trailing junk.
std::optional<double> parse_real(std::string_view text);

std::string_view trim(std::string_view s) noexcept;

}  // namespace panelmi::csv
