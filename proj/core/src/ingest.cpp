#include "panelmi/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "panelmi/csv.hpp"
#include "panelmi/error.hpp"

namespace panelmi {

namespace {

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = value.find(',', start);
    out.emplace_back(csv::trim(value.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

int parse_int(std::string_view text, std::size_t line, const std::string& what) {
  text = csv::trim(text);
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw ParseError("invalid " + what + " '" + std::string(text) + "'", line, {});
  return value;
}

std::vector<int> parse_years(std::string_view value, std::size_t line) {
  std::vector<int> years;
  for (const auto& item : split_list(value)) {
    const auto dash = item.find('-', 1);
    if (dash != std::string::npos) {
      const int lo = parse_int(std::string_view(item).substr(0, dash), line, "year");
      const int hi = parse_int(std::string_view(item).substr(dash + 1), line, "year");
      if (hi < lo) throw ParseError("descending year range '" + item + "'", line, {});
      for (int y = lo; y <= hi; ++y) years.push_back(y);
    } else {
      years.push_back(parse_int(item, line, "year"));
    }
  }
  return years;
}

struct Grid {
  std::vector<std::string> countries;
  std::vector<int> years;
  std::unordered_map<std::string, std::size_t> country_index;
  std::unordered_map<int, std::size_t> year_index;
  bool fixed_countries = false;
  bool fixed_years = false;
};

Grid grid_from_schema(const SchemaFile& schema) {
  Grid g;
  if (schema.countries) {
    g.fixed_countries = true;
    g.countries = *schema.countries;
  }
  if (schema.years) {
    g.fixed_years = true;
    g.years = *schema.years;
  }
  for (std::size_t i = 0; i < g.countries.size(); ++i) g.country_index.emplace(g.countries[i], i);
  for (std::size_t i = 0; i < g.years.size(); ++i) g.year_index.emplace(g.years[i], i);
  return g;
}

void note_country(Grid& g, const std::string& country, std::size_t row, const std::string& column) {
  if (g.country_index.count(country)) return;
  if (g.fixed_countries) throw ParseError("country '" + country + "' not declared in schema", row, column);
  g.country_index.emplace(country, g.countries.size());
  g.countries.push_back(country);
}

void note_year(Grid& g, int year, std::size_t row, const std::string& column) {
  if (g.year_index.count(year)) return;
  if (g.fixed_years) throw ParseError("year " + std::to_string(year) + " not declared in schema", row, column);
  g.year_index.emplace(year, g.years.size());
  g.years.push_back(year);
}

int parse_year_cell(const std::string& cell, std::size_t row, const std::string& column) {
  const auto t = csv::trim(cell);
  int year = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), year);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    throw ParseError("invalid year '" + cell + "'", row, column);
  return year;
}

const std::string& cell_at(const std::vector<std::string>& record, std::size_t i) {
  static const std::string empty;
  return i < record.size() ? record[i] : empty;
}

/// Sort free-form years ascending and return the dataset.
PanelDataset finish(Grid g, std::vector<VariableMeta> vars, std::vector<CellRecord> cells) {
  if (!g.fixed_years) std::sort(g.years.begin(), g.years.end());
  if (g.countries.empty() || g.years.empty())
    throw DataError("no rows and no grid extents declared in the schema");
  return build_panel(std::move(g.countries), std::move(g.years), std::move(vars), cells);
}

std::string format_value(double v, std::optional<int> decimals) {
  return decimals ? csv::format_real(v, *decimals) : csv::format_real(v);
}

}  // namespace

const VariableMeta* SchemaFile::find(std::string_view code) const noexcept {
  for (const auto& v : variables)
    if (v.code == code) return &v;
  return nullptr;
}

bool SchemaFile::is_missing_token(std::string_view cell) const noexcept {
  const auto t = csv::trim(cell);
  return std::find(missing_tokens.begin(), missing_tokens.end(), t) != missing_tokens.end();
}

SchemaFile SchemaFile::from_dataset(const PanelDataset& ds) {
  SchemaFile s;
  s.variables = ds.variables();
  s.countries = ds.countries();
  s.years = ds.years();
  return s;
}

SchemaFile parse_schema(std::string_view text) {
  SchemaFile schema;
  std::map<std::string, std::size_t> index;
  std::vector<std::uint8_t> has_capacity;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = csv::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no, {});
    const std::string key(csv::trim(line.substr(0, eq)));
    const std::string value(csv::trim(line.substr(eq + 1)));

    if (key == "country_column") {
      schema.country_column = value;
    } else if (key == "year_column") {
      schema.year_column = value;
    } else if (key == "missing_tokens") {
      schema.missing_tokens.clear();
      for (auto& tok : split_list(value)) schema.missing_tokens.push_back(tok == "<empty>" ? "" : tok);
    } else if (key == "countries") {
      schema.countries = split_list(value);
    } else if (key == "years") {
      schema.years = parse_years(value, line_no);
    } else {
      const auto dot = key.rfind('.');
      if (dot == std::string::npos || dot == 0) throw ParseError("unknown schema key '" + key + "'", line_no, {});
      const std::string code = key.substr(0, dot);
      const std::string field = key.substr(dot + 1);
      auto [it, inserted] = index.emplace(code, schema.variables.size());
      if (inserted) {
        VariableMeta meta;
        meta.code = code;
        schema.variables.push_back(meta);
        has_capacity.push_back(0);
      }
      VariableMeta& meta = schema.variables[it->second];
      if (field == "label") {
        meta.label = value;
      } else if (field == "capacity") {
        meta.capacity = parse_capacity(value);
        has_capacity[it->second] = 1;
      } else if (field == "direction") {
        if (value == "+1" || value == "1") meta.direction = 1;
        else if (value == "-1") meta.direction = -1;
        else throw ParseError("direction must be +1 or -1 for '" + code + "'", line_no, {});
      } else if (field == "role") {
        meta.role = parse_role(value);
      } else {
        throw ParseError("unknown variable field '" + field + "'", line_no, {});
      }
    }
  }
  for (std::size_t i = 0; i < schema.variables.size(); ++i) {
    auto& meta = schema.variables[i];
    if (has_capacity[i]) continue;
    if (meta.role == Role::Auxiliary) meta.capacity = Capacity::Auxiliary;
    else if (meta.role == Role::Identifier) meta.capacity = Capacity::Identifier;
    else throw ParseError("target variable '" + meta.code + "' has no capacity", 0, {});
  }
  for (const auto& meta : schema.variables)
    if (meta.role == Role::Target && meta.capacity == Capacity::Identifier)
      throw ParseError("identifier capacity on target variable '" + meta.code + "'", 0, {});
  return schema;
}

SchemaFile read_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_schema(buffer.str());
}

std::string format_schema(const SchemaFile& schema) {
  std::ostringstream out;
  out << "country_column = " << schema.country_column << "\n";
  out << "year_column = " << schema.year_column << "\n";
  out << "missing_tokens = ";
  for (std::size_t i = 0; i < schema.missing_tokens.size(); ++i)
    out << (i ? ", " : "") << (schema.missing_tokens[i].empty() ? "<empty>" : schema.missing_tokens[i]);
  out << "\n";
  if (schema.countries) {
    out << "countries = ";
    for (std::size_t i = 0; i < schema.countries->size(); ++i) out << (i ? ", " : "") << (*schema.countries)[i];
    out << "\n";
  }
  if (schema.years) {
    out << "years = ";
    for (std::size_t i = 0; i < schema.years->size(); ++i) out << (i ? ", " : "") << (*schema.years)[i];
    out << "\n";
  }
  for (const auto& v : schema.variables) {
    out << "\n";
    if (!v.label.empty()) out << v.code << ".label = " << v.label << "\n";
    out << v.code << ".capacity = " << to_string(v.capacity) << "\n";
    out << v.code << ".direction = " << (v.direction > 0 ? "+1" : "-1") << "\n";
    out << v.code << ".role = " << to_string(v.role) << "\n";
  }
  return out.str();
}

void write_schema(const SchemaFile& schema, const std::filesystem::path& path) {
  write_text_file(path, format_schema(schema));
}

PanelDataset parse_wide_csv(std::string_view text, const SchemaFile& schema) {
  const csv::Table table = csv::parse(text);
  const auto country_col = table.column(schema.country_column);
  const auto year_col = table.column(schema.year_column);
  if (!country_col) throw ParseError("missing country column '" + schema.country_column + "'", 1, {});
  if (!year_col) throw ParseError("missing year column '" + schema.year_column + "'", 1, {});

  std::unordered_map<std::string, std::size_t> column_of;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i == *country_col || i == *year_col) continue;
    const std::string& code = table.header[i];
    if (!schema.find(code)) throw UnknownCodeError("variable (not in schema)", code);
    if (!column_of.emplace(code, i).second) throw ParseError("duplicate header column", 1, code);
  }
  if (column_of.empty()) throw ParseError("no schema-declared variable columns in header", 1, {});

  std::vector<VariableMeta> vars;
  for (const auto& meta : schema.variables)
    if (column_of.count(meta.code)) vars.push_back(meta);

  Grid grid = grid_from_schema(schema);
  std::vector<CellRecord> cells;
  std::unordered_set<std::string> seen_rows;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& record = table.rows[r];
    const std::size_t file_row = r + 2;
    const std::string country(csv::trim(cell_at(record, *country_col)));
    if (country.empty()) throw ParseError("empty country", file_row, schema.country_column);
    const int year = parse_year_cell(cell_at(record, *year_col), file_row, schema.year_column);
    if (!seen_rows.insert(country + '\x1f' + std::to_string(year)).second)
      throw ParseError("duplicate (country, year) row (" + country + ", " + std::to_string(year) + ")", file_row,
                       {});
    note_country(grid, country, file_row, schema.country_column);
    note_year(grid, year, file_row, schema.year_column);
    for (const auto& meta : vars) {
      const std::string& raw = cell_at(record, column_of.at(meta.code));
      if (schema.is_missing_token(raw)) continue;
      const auto value = csv::parse_real(raw);
      if (!value) throw ParseError("unparseable numeric cell '" + raw + "'", file_row, meta.code);
      cells.push_back({country, year, meta.code, *value});
    }
  }
  return finish(std::move(grid), std::move(vars), std::move(cells));
}

PanelDataset read_wide_csv(const std::filesystem::path& path, const SchemaFile& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_wide_csv(buffer.str(), schema);
}

PanelDataset parse_long_csv(std::string_view text, const SchemaFile& schema) {
  const csv::Table table = csv::parse(text);
  const auto country_col = table.column(schema.country_column);
  const auto year_col = table.column(schema.year_column);
  const auto var_col = table.column("variable");
  const auto value_col = table.column("value");
  if (!country_col || !year_col || !var_col || !value_col)
    throw ParseError("long layout needs columns " + schema.country_column + "," + schema.year_column +
                         ",variable,value",
                     1, {});

  Grid grid = grid_from_schema(schema);
  std::vector<CellRecord> cells;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& record = table.rows[r];
    const std::size_t file_row = r + 2;
    const std::string country(csv::trim(cell_at(record, *country_col)));
    if (country.empty()) throw ParseError("empty country", file_row, schema.country_column);
    const int year = parse_year_cell(cell_at(record, *year_col), file_row, schema.year_column);
    const std::string code(csv::trim(cell_at(record, *var_col)));
    if (!schema.find(code)) throw UnknownCodeError("variable (not in schema)", code);
    note_country(grid, country, file_row, schema.country_column);
    note_year(grid, year, file_row, schema.year_column);
    const std::string& raw = cell_at(record, *value_col);
    if (schema.is_missing_token(raw)) continue;
    const auto value = csv::parse_real(raw);
    if (!value) throw ParseError("unparseable numeric cell '" + raw + "'", file_row, "value");
    cells.push_back({country, year, code, *value});
  }
  return finish(std::move(grid), schema.variables, std::move(cells));
}

PanelDataset read_long_csv(const std::filesystem::path& path, const SchemaFile& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_long_csv(buffer.str(), schema);
}

std::string format_wide_csv(const PanelDataset& ds, std::optional<int> decimals) {
  std::ostringstream out;
  std::vector<std::string> fields{"country", "year"};
  for (const auto& v : ds.variables()) fields.push_back(v.code);
  csv::write_row(out, fields);
  for (std::size_t i = 0; i < ds.row_count(); ++i) {
    const auto& key = ds.rows()[i];
    fields.clear();
    fields.push_back(ds.countries()[key.country]);
    fields.push_back(std::to_string(ds.years()[key.year]));
    for (std::size_t v = 0; v < ds.variable_count(); ++v)
      fields.push_back(ds.observed(i, v) ? format_value(ds.column(v)[i], decimals) : std::string());
    csv::write_row(out, fields);
  }
  return out.str();
}

std::string format_long_csv(const PanelDataset& ds, std::optional<int> decimals) {
  std::ostringstream out;
  const std::vector<std::string> header{"country", "year", "variable", "value"};
  csv::write_row(out, header);
  std::vector<std::string> fields(4);
  for (std::size_t i = 0; i < ds.row_count(); ++i) {
    const auto& key = ds.rows()[i];
    for (std::size_t v = 0; v < ds.variable_count(); ++v) {
      fields[0] = ds.countries()[key.country];
      fields[1] = std::to_string(ds.years()[key.year]);
      fields[2] = ds.variables()[v].code;
      fields[3] = ds.observed(i, v) ? format_value(ds.column(v)[i], decimals) : std::string();
      csv::write_row(out, fields);
    }
  }
  return out.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

void write_wide_csv(const PanelDataset& ds, const std::filesystem::path& path, std::optional<int> decimals) {
  write_text_file(path, format_wide_csv(ds, decimals));
}

void write_long_csv(const PanelDataset& ds, const std::filesystem::path& path, std::optional<int> decimals) {
  write_text_file(path, format_long_csv(ds, decimals));
}

}  // namespace panelmi
