#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "panelmi/datamodel.hpp"

namespace panelmi {

/// The six capacity groups in ranking-table column order.
inline constexpr std::array<Capacity, 6> kIndexCapacities = {Capacity::Technology,     Capacity::Financial,
                                                             Capacity::Infrastructure, Capacity::Human,
                                                             Capacity::PublicPolicy,   Capacity::Social};
inline constexpr std::array<std::string_view, 6> kIndexColumns = {
    "Tech_Index",          "Finance_Index",      "Infrastructure_Index",
    "HumanCapacity_Index", "PublicPolicy_Index", "SocialCapacity_Index"};
inline constexpr std::string_view kAbsorptiveColumn = "AbsorptiveCapacity_Index";

enum class Normalization {
  PerYear,      ///< z-scores across countries within the chosen year
  PooledYears,  ///< z-scores across every country-year row
};

std::string_view to_string(Normalization n) noexcept;
Normalization parse_normalization(std::string_view text);

struct IndexOptions {
  Normalization normalization = Normalization::PerYear;
};

struct CountryIndices {
  std::string country;
  std::array<double, 6> capacity{};  ///< kIndexCapacities order
  double absorptive = 0.0;
};

struct CapacityIndexTable {
  int year = 0;
  std::vector<CountryIndices> rows;
};

/// Signed z-score means per capacity group, then their unweighted mean.
/// Every non-identifier variable tagged with one of the six capacities takes
/// part. Zero-variance variables contribute 0. Throws DataError for an
/// unknown year (listing the available ones), an empty capacity group, or a
/// missing cell among the indexed variables.
CapacityIndexTable capacity_indices(const PanelDataset& completed, int year, const IndexOptions& options = {});

struct RankedCountry {
  int rank = 0;
  CountryIndices indices;
};

using RankingTable = std::vector<RankedCountry>;

/// Descending absorptive index; equal values ordered by country code.
RankingTable rank(const CapacityIndexTable& table);

/// A table already in ranking layout. The Rank column, when present, is returned
/// separately so callers can compare it with a fresh ranking.
struct IndexTableFile {
  CapacityIndexTable table;
  std::vector<std::optional<int>> printed_rank;
};

IndexTableFile parse_index_table_csv(std::string_view text);
IndexTableFile read_index_table_csv(const std::string& path);

/// Rank, Country, six capacity columns, AbsorptiveCapacity_Index.
std::string format_ranking_csv(const RankingTable& ranking, std::optional<int> decimals = std::nullopt);

}  // namespace panelmi
