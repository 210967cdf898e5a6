#include "panelmi/datamodel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <unordered_map>
#include <unordered_set>

#include "panelmi/error.hpp"

namespace panelmi {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  out.erase(std::remove_if(out.begin(), out.end(), [](char c) { return c == '_' || c == '-' || c == ' '; }),
            out.end());
  return out;
}

}  // namespace

std::string_view to_string(Capacity c) noexcept {
  switch (c) {
    case Capacity::Technology: return "Technology";
    case Capacity::Financial: return "Financial";
    case Capacity::Human: return "Human";
    case Capacity::Infrastructure: return "Infrastructure";
    case Capacity::PublicPolicy: return "PublicPolicy";
    case Capacity::Social: return "Social";
    case Capacity::Auxiliary: return "Auxiliary";
    case Capacity::Identifier: return "Identifier";
  }
  return "?";
}

std::string_view to_string(Role r) noexcept {
  switch (r) {
    case Role::Target: return "target";
    case Role::Auxiliary: return "auxiliary";
    case Role::Identifier: return "identifier";
  }
  return "?";
}

Capacity parse_capacity(std::string_view text) {
  const std::string t = lower(text);
  if (t == "technology" || t == "tech") return Capacity::Technology;
  if (t == "financial" || t == "finance") return Capacity::Financial;
  if (t == "human" || t == "humancapacity" || t == "humancapital") return Capacity::Human;
  if (t == "infrastructure" || t == "infrastructural") return Capacity::Infrastructure;
  if (t == "publicpolicy") return Capacity::PublicPolicy;
  if (t == "social" || t == "socialcapacity") return Capacity::Social;
  if (t == "auxiliary") return Capacity::Auxiliary;
  if (t == "identifier") return Capacity::Identifier;
  throw UnknownCodeError("capacity", std::string(text));
}

Role parse_role(std::string_view text) {
  const std::string t = lower(text);
  if (t == "target" || t == "imputationtarget") return Role::Target;
  if (t == "auxiliary" || t == "auxiliarypredictor") return Role::Auxiliary;
  if (t == "identifier") return Role::Identifier;
  throw UnknownCodeError("role", std::string(text));
}

PanelDataset::PanelDataset(std::vector<std::string> countries, std::vector<int> years,
                           std::vector<VariableMeta> variables, std::vector<RowKey> rows,
                           std::vector<std::vector<double>> values, std::vector<std::vector<std::uint8_t>> masks)
    : countries_(std::move(countries)),
      years_(std::move(years)),
      variables_(std::move(variables)),
      rows_(std::move(rows)),
      values_(std::move(values)),
      masks_(std::move(masks)) {
  validate();
}

PanelDataset PanelDataset::empty_grid(std::vector<std::string> countries, std::vector<int> years,
                                      std::vector<VariableMeta> variables) {
  std::vector<RowKey> rows;
  rows.reserve(countries.size() * years.size());
  for (std::size_t c = 0; c < countries.size(); ++c)
    for (std::size_t y = 0; y < years.size(); ++y) rows.push_back({c, y});
  const std::size_t n = rows.size();
  std::vector<std::vector<double>> values(variables.size(), std::vector<double>(n, 0.0));
  std::vector<std::vector<std::uint8_t>> masks(variables.size(), std::vector<std::uint8_t>(n, 0));
  return PanelDataset(std::move(countries), std::move(years), std::move(variables), std::move(rows),
                      std::move(values), std::move(masks));
}

void PanelDataset::validate() const {
  {
    std::unordered_set<std::string> seen;
    for (const auto& c : countries_)
      if (!seen.insert(c).second) throw DataError("duplicate country '" + c + "'");
  }
  {
    std::unordered_set<int> seen;
    for (int y : years_)
      if (!seen.insert(y).second) throw DataError("duplicate year " + std::to_string(y));
  }
  {
    std::unordered_set<std::string> seen;
    for (const auto& v : variables_) {
      if (v.code.empty()) throw DataError("empty variable code");
      if (!seen.insert(v.code).second) throw DataError("duplicate variable code '" + v.code + "'");
      if (v.direction != 1 && v.direction != -1)
        throw DataError("variable '" + v.code + "': direction must be +1 or -1");
      if (v.role == Role::Target && v.capacity == Capacity::Identifier)
        throw DataError("variable '" + v.code + "': identifiers cannot be imputation targets");
    }
  }
  std::vector<std::uint8_t> seen(countries_.size() * years_.size(), 0);
  for (const auto& r : rows_) {
    if (r.country >= countries_.size() || r.year >= years_.size()) throw DataError("row key out of range");
    auto& s = seen[r.country * years_.size() + r.year];
    if (s) throw DataError("duplicate row (" + countries_[r.country] + ", " + std::to_string(years_[r.year]) + ")");
    s = 1;
  }
  if (values_.size() != variables_.size() || masks_.size() != variables_.size())
    throw DataError("column count does not match variable count");
  for (std::size_t v = 0; v < variables_.size(); ++v) {
    if (values_[v].size() != rows_.size() || masks_[v].size() != rows_.size())
      throw DataError("column '" + variables_[v].code + "' has wrong length");
    for (std::size_t i = 0; i < rows_.size(); ++i)
      if (masks_[v][i] && !std::isfinite(values_[v][i]))
        throw DataError("non-finite observed value in '" + variables_[v].code + "'");
  }
}

std::optional<std::size_t> PanelDataset::find_variable(std::string_view code) const noexcept {
  for (std::size_t v = 0; v < variables_.size(); ++v)
    if (variables_[v].code == code) return v;
  return std::nullopt;
}

std::size_t PanelDataset::variable_index(std::string_view code) const {
  if (auto v = find_variable(code)) return *v;
  throw UnknownCodeError("variable", std::string(code));
}

std::size_t PanelDataset::missing_count(std::size_t v) const noexcept {
  return static_cast<std::size_t>(std::count(masks_[v].begin(), masks_[v].end(), std::uint8_t{0}));
}

std::size_t PanelDataset::missing_count() const noexcept {
  std::size_t total = 0;
  for (std::size_t v = 0; v < variables_.size(); ++v) total += missing_count(v);
  return total;
}

std::optional<std::size_t> PanelDataset::find_row(std::size_t country, std::size_t year) const noexcept {
  if (is_full_grid()) {
    const std::size_t i = country * years_.size() + year;
    if (i < rows_.size() && rows_[i].country == country && rows_[i].year == year) return i;
  }
  for (std::size_t i = 0; i < rows_.size(); ++i)
    if (rows_[i].country == country && rows_[i].year == year) return i;
  return std::nullopt;
}

PanelDataset PanelDataset::with_column(std::size_t v, std::vector<double> values,
                                       std::vector<std::uint8_t> mask) const {
  auto vals = values_;
  auto masks = masks_;
  vals.at(v) = std::move(values);
  masks.at(v) = std::move(mask);
  return PanelDataset(countries_, years_, variables_, rows_, std::move(vals), std::move(masks));
}

PanelDataset PanelDataset::select_variables(std::span<const std::string> codes) const {
  std::vector<VariableMeta> vars;
  std::vector<std::vector<double>> vals;
  std::vector<std::vector<std::uint8_t>> masks;
  for (const auto& code : codes) {
    const std::size_t v = variable_index(code);
    vars.push_back(variables_[v]);
    vals.push_back(values_[v]);
    masks.push_back(masks_[v]);
  }
  return PanelDataset(countries_, years_, std::move(vars), rows_, std::move(vals), std::move(masks));
}

PanelDataset PanelDataset::select_rows(std::span<const std::size_t> rows) const {
  std::vector<RowKey> keys;
  keys.reserve(rows.size());
  for (std::size_t i : rows) keys.push_back(rows_.at(i));
  std::vector<std::vector<double>> vals(variables_.size());
  std::vector<std::vector<std::uint8_t>> masks(variables_.size());
  for (std::size_t v = 0; v < variables_.size(); ++v) {
    vals[v].reserve(rows.size());
    masks[v].reserve(rows.size());
    for (std::size_t i : rows) {
      vals[v].push_back(values_[v][i]);
      masks[v].push_back(masks_[v][i]);
    }
  }
  return PanelDataset(countries_, years_, variables_, std::move(keys), std::move(vals), std::move(masks));
}

PanelDataset PanelDataset::with_variables(std::vector<VariableMeta> variables) const {
  if (variables.size() != variables_.size()) throw DataError("with_variables: variable count mismatch");
  for (std::size_t v = 0; v < variables.size(); ++v)
    if (variables[v].code != variables_[v].code) throw DataError("with_variables: code mismatch");
  return PanelDataset(countries_, years_, std::move(variables), rows_, values_, masks_);
}

bool PanelDataset::same_as(const PanelDataset& other) const noexcept {
  if (countries_ != other.countries_ || years_ != other.years_ || rows_ != other.rows_) return false;
  if (variables_.size() != other.variables_.size()) return false;
  for (std::size_t v = 0; v < variables_.size(); ++v) {
    const auto& a = variables_[v];
    const auto& b = other.variables_[v];
    if (a.code != b.code || a.capacity != b.capacity || a.direction != b.direction || a.role != b.role) return false;
    if (masks_[v] != other.masks_[v]) return false;
    for (std::size_t i = 0; i < rows_.size(); ++i)
      if (masks_[v][i] && std::memcmp(&values_[v][i], &other.values_[v][i], sizeof(double)) != 0) return false;
  }
  return true;
}

PanelDataset build_panel(std::vector<std::string> countries, std::vector<int> years,
                         std::vector<VariableMeta> variables, std::span<const CellRecord> cells) {
  if (countries.empty()) throw DataError("build_panel: country list is empty");
  if (years.empty()) throw DataError("build_panel: year list is empty");

  std::unordered_map<std::string, std::size_t> country_index, variable_index;
  std::unordered_map<int, std::size_t> year_index;
  for (std::size_t i = 0; i < countries.size(); ++i)
    if (!country_index.emplace(countries[i], i).second) throw DataError("duplicate country '" + countries[i] + "'");
  for (std::size_t i = 0; i < years.size(); ++i)
    if (!year_index.emplace(years[i], i).second) throw DataError("duplicate year " + std::to_string(years[i]));
  for (std::size_t i = 0; i < variables.size(); ++i)
    if (!variable_index.emplace(variables[i].code, i).second)
      throw DataError("duplicate variable code '" + variables[i].code + "'");

  const std::size_t n = countries.size() * years.size();
  std::vector<std::vector<double>> values(variables.size(), std::vector<double>(n, 0.0));
  std::vector<std::vector<std::uint8_t>> masks(variables.size(), std::vector<std::uint8_t>(n, 0));
  for (const auto& cell : cells) {
    auto c = country_index.find(cell.country);
    if (c == country_index.end()) throw UnknownCodeError("country", cell.country);
    auto y = year_index.find(cell.year);
    if (y == year_index.end()) throw UnknownCodeError("year", std::to_string(cell.year));
    auto v = variable_index.find(cell.variable);
    if (v == variable_index.end()) throw UnknownCodeError("variable", cell.variable);
    if (!std::isfinite(cell.value))
      throw DataError("non-finite value for (" + cell.country + ", " + std::to_string(cell.year) + ", " +
                      cell.variable + ")");
    const std::size_t row = c->second * years.size() + y->second;
    if (masks[v->second][row])
      throw DataError("duplicate cell address (" + cell.country + ", " + std::to_string(cell.year) + ", " +
                      cell.variable + ")");
    masks[v->second][row] = 1;
    values[v->second][row] = cell.value;
  }

  std::vector<RowKey> rows;
  rows.reserve(n);
  for (std::size_t c = 0; c < countries.size(); ++c)
    for (std::size_t y = 0; y < years.size(); ++y) rows.push_back({c, y});
  return PanelDataset(std::move(countries), std::move(years), std::move(variables), std::move(rows),
                      std::move(values), std::move(masks));
}

MissingProfile missing_profile(const PanelDataset& ds) {
  MissingProfile profile;
  profile.reserve(ds.variable_count());
  const std::size_t total = ds.row_count();
  for (std::size_t v = 0; v < ds.variable_count(); ++v) {
    const std::size_t missing = ds.missing_count(v);
    profile.push_back({ds.variables()[v].code, total - missing, missing,
                       total == 0 ? 0.0 : static_cast<double>(missing) / static_cast<double>(total)});
  }
  return profile;
}

std::vector<double> observed_values(const PanelDataset& ds, std::string_view code) {
  const std::size_t v = ds.variable_index(code);
  std::vector<double> out;
  const auto col = ds.column(v);
  const auto mask = ds.mask(v);
  for (std::size_t i = 0; i < col.size(); ++i)
    if (mask[i]) out.push_back(col[i]);
  return out;
}

}  // namespace panelmi
