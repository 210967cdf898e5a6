#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace panelmi {

enum class Capacity { Technology, Financial, Human, Infrastructure, PublicPolicy, Social, Auxiliary, Identifier };

enum class Role { Target, Auxiliary, Identifier };

std::string_view to_string(Capacity c) noexcept;
std::string_view to_string(Role r) noexcept;
/// Accepts the enumerator names case-insensitively plus a few spelled-out aliases ("Finance", "HumanCapacity").
Capacity parse_capacity(std::string_view text);
/// Accepts "target" / "imputation-target", "auxiliary" / "auxiliary-predictor", "identifier".
Role parse_role(std::string_view text);

struct VariableMeta {
  std::string code;
  std::string label;
  Capacity capacity = Capacity::Auxiliary;
  int direction = +1;  ///< higher-is-better sign used by the index builder
  Role role = Role::Target;
};

/// Position of a row in the (country, year) grid, as indices into the dataset's lists.
struct RowKey {
  std::size_t country = 0;
  std::size_t year = 0;
  friend bool operator==(const RowKey&, const RowKey&) = default;
};

/// Country x year x variable panel with an explicit observation mask.
///
/// Values are stored column-wise; a cell is meaningful only when its mask byte
/// is 1. Missing cells hold 0.0 and are never read as data. Instances are
/// immutable: the `with_*` / `select_*` members build derived datasets.
///
/// Datasets produced by build_panel and the CSV readers cover the full
/// rectangular grid in (country, year) order. Row-subset datasets (listwise
/// deletion) keep the same country/year lists with fewer rows.
class PanelDataset {
public:
  PanelDataset() = default;
  PanelDataset(std::vector<std::string> countries, std::vector<int> years, std::vector<VariableMeta> variables,
               std::vector<RowKey> rows, std::vector<std::vector<double>> values,
               std::vector<std::vector<std::uint8_t>> masks);

  /// Full-grid dataset with every cell missing.
  static PanelDataset empty_grid(std::vector<std::string> countries, std::vector<int> years,
                                 std::vector<VariableMeta> variables);

  const std::vector<std::string>& countries() const noexcept { return countries_; }
  const std::vector<int>& years() const noexcept { return years_; }
  const std::vector<VariableMeta>& variables() const noexcept { return variables_; }
  const std::vector<RowKey>& rows() const noexcept { return rows_; }

  std::size_t row_count() const noexcept { return rows_.size(); }
  std::size_t variable_count() const noexcept { return variables_.size(); }
  bool is_full_grid() const noexcept { return rows_.size() == countries_.size() * years_.size(); }

  std::optional<std::size_t> find_variable(std::string_view code) const noexcept;
  /// Throws UnknownCodeError.
  std::size_t variable_index(std::string_view code) const;
  const VariableMeta& variable(std::string_view code) const { return variables_[variable_index(code)]; }

  std::span<const double> column(std::size_t v) const noexcept { return values_[v]; }
  std::span<const std::uint8_t> mask(std::size_t v) const noexcept { return masks_[v]; }
  bool observed(std::size_t row, std::size_t v) const noexcept { return masks_[v][row] != 0; }
  std::optional<double> cell(std::size_t row, std::size_t v) const noexcept {
    if (!observed(row, v)) return std::nullopt;
    return values_[v][row];
  }

  std::size_t missing_count(std::size_t v) const noexcept;
  std::size_t missing_count() const noexcept;

  /// Row index of (country, year); nullopt when that row is not present.
  std::optional<std::size_t> find_row(std::size_t country, std::size_t year) const noexcept;

  PanelDataset with_column(std::size_t v, std::vector<double> values, std::vector<std::uint8_t> mask) const;
  PanelDataset select_variables(std::span<const std::string> codes) const;
  PanelDataset select_rows(std::span<const std::size_t> rows) const;
  /// Same data with per-variable metadata replaced (codes must match in order).
  PanelDataset with_variables(std::vector<VariableMeta> variables) const;

  /// Bitwise comparison of grid, metadata, masks and observed values.
  bool same_as(const PanelDataset& other) const noexcept;

private:
  void validate() const;

  std::vector<std::string> countries_;
  std::vector<int> years_;
  std::vector<VariableMeta> variables_;
  std::vector<RowKey> rows_;
  std::vector<std::vector<double>> values_;
  std::vector<std::vector<std::uint8_t>> masks_;
};

struct CellRecord {
  std::string country;
  int year = 0;
  std::string variable;
  double value = 0.0;
};

/// Materialize a rectangular panel; unaddressed cells are missing.
/// Throws DataError on duplicate or unknown addresses and on non-finite values.
PanelDataset build_panel(std::vector<std::string> countries, std::vector<int> years,
                         std::vector<VariableMeta> variables, std::span<const CellRecord> cells);

struct VariableMissingness {
  std::string code;
  std::size_t observed = 0;
  std::size_t missing = 0;
  double fraction = 0.0;  ///< missing / (observed + missing)
};

using MissingProfile = std::vector<VariableMissingness>;

MissingProfile missing_profile(const PanelDataset& ds);

/// Observed values of `code` in row order.
std::vector<double> observed_values(const PanelDataset& ds, std::string_view code);

}  // namespace panelmi
