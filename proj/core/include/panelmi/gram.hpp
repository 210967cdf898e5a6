#pragma once

#include <span>

#include <Eigen/Dense>

namespace panelmi {

/// A column matrix together with its cross-product matrix C'C, kept in step
/// as single columns are replaced.
class GramCache {
public:
  GramCache() = default;
  explicit GramCache(Eigen::MatrixXd columns);

  const Eigen::MatrixXd& columns() const noexcept { return columns_; }
  const Eigen::MatrixXd& gram() const noexcept { return gram_; }

  /// Overwrites column k and recomputes row and column k of the cross products.
  void replace_column(Eigen::Index k, const Eigen::Ref<const Eigen::VectorXd>& values);

  /// Cross products of the `selection` columns over the `keep` rows. `drop`
  /// must be the complement of `keep`; whichever of the two is shorter is
  /// summed (directly, or subtracted from the full cross products).
  Eigen::MatrixXd subset(std::span<const Eigen::Index> selection, std::span<const Eigen::Index> keep,
                         std::span<const Eigen::Index> drop) const;

private:
  Eigen::MatrixXd columns_;
  Eigen::MatrixXd gram_;
};

}  // namespace panelmi
