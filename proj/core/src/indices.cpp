#include "panelmi/indices.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "panelmi/csv.hpp"
#include "panelmi/error.hpp"

namespace panelmi {

std::string_view to_string(Normalization n) noexcept {
  return n == Normalization::PerYear ? "per-year" : "pooled-years";
}

Normalization parse_normalization(std::string_view text) {
  if (text == "per-year") return Normalization::PerYear;
  if (text == "pooled-years") return Normalization::PooledYears;
  throw ConfigError("unknown normalization '" + std::string(text) + "' (expected per-year or pooled-years)");
}

namespace {

std::optional<std::size_t> group_of(Capacity c) {
  for (std::size_t g = 0; g < kIndexCapacities.size(); ++g)
    if (kIndexCapacities[g] == c) return g;
  return std::nullopt;
}

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

Moments moments(const std::vector<double>& x) {
  Moments m;
  if (x.empty()) return m;
  for (double v : x) m.mean += v;
  m.mean /= static_cast<double>(x.size());
  if (x.size() < 2) return m;
  double ss = 0.0;
  for (double v : x) ss += (v - m.mean) * (v - m.mean);
  m.sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
  return m;
}

}  // namespace

CapacityIndexTable capacity_indices(const PanelDataset& completed, int year, const IndexOptions& options) {
  const auto& years = completed.years();
  const auto yit = std::find(years.begin(), years.end(), year);
  if (yit == years.end()) {
    std::string list;
    for (int y : years) list += (list.empty() ? "" : ", ") + std::to_string(y);
    throw DataError("year " + std::to_string(year) + " not in the dataset (available: " + list + ")");
  }
  const auto year_index = static_cast<std::size_t>(yit - years.begin());

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < completed.row_count(); ++i)
    if (completed.rows()[i].year == year_index) rows.push_back(i);

  std::array<std::vector<std::size_t>, 6> groups;
  for (std::size_t v = 0; v < completed.variable_count(); ++v) {
    const auto& meta = completed.variables()[v];
    if (meta.role == Role::Identifier) continue;
    if (auto g = group_of(meta.capacity)) groups[*g].push_back(v);
  }
  for (std::size_t g = 0; g < groups.size(); ++g)
    if (groups[g].empty())
      throw DataError("no variable belongs to capacity group '" + std::string(to_string(kIndexCapacities[g])) + "'");

  CapacityIndexTable table;
  table.year = year;
  table.rows.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) table.rows[r].country = completed.countries()[completed.rows()[rows[r]].country];

  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t v : groups[g]) {
      const auto& meta = completed.variables()[v];
      for (std::size_t i : rows)
        if (!completed.observed(i, v))
          throw DataError("variable '" + meta.code + "' has a missing cell in " + std::to_string(year));
      std::vector<double> basis;
      if (options.normalization == Normalization::PerYear) {
        for (std::size_t i : rows) basis.push_back(completed.column(v)[i]);
      } else {
        for (std::size_t i = 0; i < completed.row_count(); ++i)
          if (completed.observed(i, v)) basis.push_back(completed.column(v)[i]);
      }
      const Moments m = moments(basis);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const double z = m.sd > 0.0 ? (completed.column(v)[rows[r]] - m.mean) / m.sd : 0.0;
        table.rows[r].capacity[g] += meta.direction * z;
      }
    }
    for (auto& row : table.rows) row.capacity[g] /= static_cast<double>(groups[g].size());
  }
  for (auto& row : table.rows) {
    double sum = 0.0;
    for (double c : row.capacity) sum += c;
    row.absorptive = sum / 6.0;
  }
  return table;
}

RankingTable rank(const CapacityIndexTable& table) {
  RankingTable out;
  for (const auto& row : table.rows) out.push_back({0, row});
  std::sort(out.begin(), out.end(), [](const RankedCountry& a, const RankedCountry& b) {
    if (a.indices.absorptive != b.indices.absorptive) return a.indices.absorptive > b.indices.absorptive;
    return a.indices.country < b.indices.country;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i) + 1;
  return out;
}

namespace {

IndexTableFile index_table_from(const csv::Table& t) {
  auto column = [&](std::string_view name, bool required) -> std::optional<std::size_t> {
    for (std::size_t c = 0; c < t.header.size(); ++c)
      if (csv::trim(t.header[c]) == name) return c;
    if (required) throw ParseError("index table lacks a column", 1, std::string(name));
    return std::nullopt;
  };
  const auto rank_col = column("Rank", false);
  const std::size_t country_col = *column("Country", true);
  std::array<std::size_t, 6> cap_cols{};
  for (std::size_t g = 0; g < 6; ++g) cap_cols[g] = *column(kIndexColumns[g], true);
  const std::size_t abs_col = *column(kAbsorptiveColumn, true);

  IndexTableFile out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::size_t line = r + 2;
    if (row.size() != t.header.size())
      throw ParseError("expected " + std::to_string(t.header.size()) + " fields, found " + std::to_string(row.size()),
                       line, "");
    auto number = [&](std::size_t c) {
      auto v = csv::parse_real(row[c]);
      if (!v) throw ParseError("not a number: '" + row[c] + "'", line, t.header[c]);
      return *v;
    };
    CountryIndices ci;
    ci.country = std::string(csv::trim(row[country_col]));
    for (std::size_t g = 0; g < 6; ++g) ci.capacity[g] = number(cap_cols[g]);
    ci.absorptive = number(abs_col);
    out.table.rows.push_back(std::move(ci));
    if (rank_col) {
      const double rk = number(*rank_col);
      if (rk != std::floor(rk) || rk < 1) throw ParseError("rank must be a positive integer", line, "Rank");
      out.printed_rank.push_back(static_cast<int>(rk));
    } else {
      out.printed_rank.push_back(std::nullopt);
    }
  }
  return out;
}

}  // namespace

IndexTableFile parse_index_table_csv(std::string_view text) { return index_table_from(csv::parse(text)); }

IndexTableFile read_index_table_csv(const std::string& path) { return index_table_from(csv::read_file(path)); }

std::string format_ranking_csv(const RankingTable& ranking, std::optional<int> decimals) {
  std::ostringstream out;
  out << "Rank,Country";
  for (auto c : kIndexColumns) out << ',' << c;
  out << ',' << kAbsorptiveColumn << '\n';
  auto num = [&](double v) { return decimals ? csv::format_real(v, *decimals) : csv::format_real(v); };
  for (const auto& r : ranking) {
    out << r.rank << ',' << csv::quote(r.indices.country);
    for (double c : r.indices.capacity) out << ',' << num(c);
    out << ',' << num(r.indices.absorptive) << '\n';
  }
  return out.str();
}

}  // namespace panelmi
