#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "panelmi/datamodel.hpp"

namespace panelmi {

/// Variable metadata plus CSV conventions.
///
/// Text grammar (one `key = value` per line, `#` starts a comment):
///
///     country_column = country          # default "country"
///     year_column    = year             # default "year"
///     missing_tokens = <empty>, NA, .   # default; <empty> is the empty cell
///     countries      = PAK, VNM         # optional grid extent
///     years          = 2005-2019        # optional; ranges and lists mix
///     <code>.label     = free text
///     <code>.capacity  = Technology|Financial|Human|Infrastructure|PublicPolicy|Social|Auxiliary|Identifier
///     <code>.direction = +1 | -1        # default +1
///     <code>.role      = target|auxiliary|identifier   # default target
///
/// Variables are declared by their first `<code>.` key; declaration order is
/// kept. Targets must name a capacity; auxiliaries and identifiers default to
/// the matching capacity.
struct SchemaFile {
  std::string country_column = "country";
  std::string year_column = "year";
  std::vector<std::string> missing_tokens = {"", "NA", "."};
  std::optional<std::vector<std::string>> countries;
  std::optional<std::vector<int>> years;
  std::vector<VariableMeta> variables;

  const VariableMeta* find(std::string_view code) const noexcept;
  bool is_missing_token(std::string_view cell) const noexcept;

  /// Schema describing `ds` exactly (codes, metadata, grid extents).
  static SchemaFile from_dataset(const PanelDataset& ds);
};

SchemaFile parse_schema(std::string_view text);
SchemaFile read_schema(const std::filesystem::path& path);
std::string format_schema(const SchemaFile& schema);
void write_schema(const SchemaFile& schema, const std::filesystem::path& path);

/// Wide layout: `country,year,<code1>,...`; one row per (country, year).
PanelDataset read_wide_csv(const std::filesystem::path& path, const SchemaFile& schema);
PanelDataset parse_wide_csv(std::string_view text, const SchemaFile& schema);

/// Long layout: `country,year,variable,value`.
PanelDataset read_long_csv(const std::filesystem::path& path, const SchemaFile& schema);
PanelDataset parse_long_csv(std::string_view text, const SchemaFile& schema);

/// `decimals` empty writes shortest round-trip reals; missing cells are empty.
std::string format_wide_csv(const PanelDataset& ds, std::optional<int> decimals = std::nullopt);
void write_wide_csv(const PanelDataset& ds, const std::filesystem::path& path,
                    std::optional<int> decimals = std::nullopt);
std::string format_long_csv(const PanelDataset& ds, std::optional<int> decimals = std::nullopt);
void write_long_csv(const PanelDataset& ds, const std::filesystem::path& path,
                    std::optional<int> decimals = std::nullopt);

/// Writes `content` to `path`, creating parent directories. Throws DataError when unwritable.
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace panelmi
